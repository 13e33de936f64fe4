// Copyright 2026 The eprqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace eprqkd {

using Complex = std::complex<double>;

inline constexpr double kDefaultTailBound = 1e-8;

/// Two-mode state truncated at N_c photons per mode. Coefficient matrices
/// are indexed [n_a][n_b]. A pure state has one component; a mixed state is
/// held as rho = sum_k |v_k><v_k| over unnormalised components.
class FockTwoMode {
 public:
  static FockTwoMode pure(Eigen::MatrixXcd coeffs, double tail_mass = 0.0) {
    check_square(coeffs);
    const double norm = coeffs.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("FockTwoMode: zero or non-finite state");
    coeffs /= norm;
    FockTwoMode s;
    s.components_.push_back(std::move(coeffs));
    s.pure_ = true;
    s.tail_mass_ = tail_mass;
    return s;
  }

  /// Components must already carry their weights; the total trace is
  /// renormalised to 1.
  static FockTwoMode mixed(std::vector<Eigen::MatrixXcd> components, double tail_mass = 0.0) {
    if (components.empty()) throw std::invalid_argument("FockTwoMode: no components");
    double tr = 0.0;
    for (const auto& c : components) {
      check_square(c);
      if (c.rows() != components.front().rows()) throw std::invalid_argument("FockTwoMode: truncation mismatch");
      tr += c.squaredNorm();
    }
    if (!(tr > 0.0) || !std::isfinite(tr)) throw std::invalid_argument("FockTwoMode: zero or non-finite trace");
    const double scale = 1.0 / std::sqrt(tr);
    for (auto& c : components) c *= scale;
    FockTwoMode s;
    s.components_ = std::move(components);
    s.pure_ = false;
    s.tail_mass_ = tail_mass;
    return s;
  }

  std::size_t truncation() const { return static_cast<std::size_t>(components_.front().rows() - 1); }
  std::size_t dim() const { return truncation() + 1; }
  bool is_pure() const { return pure_; }
  double tail_mass() const { return tail_mass_; }
  const std::vector<Eigen::MatrixXcd>& components() const { return components_; }

  const Eigen::MatrixXcd& coefficients() const {
    if (!pure_) throw std::logic_error("FockTwoMode: coefficients() needs a pure state");
    return components_.front();
  }

  double trace() const {
    double t = 0.0;
    for (const auto& c : components_) t += c.squaredNorm();
    return t;
  }

  /// Dense density matrix over the product basis, row index n_a * (N_c+1) + n_b.
  Eigen::MatrixXcd density_matrix() const {
    const auto d = static_cast<Eigen::Index>(dim() * dim());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& c : components_) {
      const Eigen::MatrixXcd rowmajor = c.transpose();
      const Eigen::Map<const Eigen::VectorXcd> v(rowmajor.data(), d);
      rho.noalias() += v * v.adjoint();
    }
    return rho;
  }

  /// Photon-number distribution of mode a (mode = 0) or b (mode = 1).
  Eigen::VectorXd photon_distribution(int mode) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
    for (const auto& c : components_) {
      p += mode == 0 ? c.cwiseAbs2().rowwise().sum().eval() : c.cwiseAbs2().colwise().sum().transpose().eval();
    }
    return p;
  }

  double mean_photons(int mode) const {
    const Eigen::VectorXd p = photon_distribution(mode);
    double m = 0.0;
    for (Eigen::Index n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p(n);
    return m;
  }

  /// Applies f to every component (used by local unitaries and channels).
  template <typename F>
  FockTwoMode map_components(F&& f) const {
    FockTwoMode out = *this;
    for (auto& c : out.components_) c = f(c);
    return out;
  }

 private:
  FockTwoMode() = default;

  static void check_square(const Eigen::MatrixXcd& c) {
    if (c.rows() == 0 || c.rows() != c.cols()) {
      throw std::invalid_argument("FockTwoMode: coefficient matrix must be square and non-empty");
    }
  }

  std::vector<Eigen::MatrixXcd> components_;
  bool pure_ = true;
  double tail_mass_ = 0.0;
};

inline void check_tail(double tail_mass, double bound, const char* what) {
  if (tail_mass > bound) {
    throw std::domain_error(std::string(what) + ": truncation insufficient, tail mass " + std::to_string(tail_mass) +
                            " exceeds " + std::to_string(bound));
  }
}

/// Fock amplitudes of the coherent state |alpha> up to n = truncation, plus
/// the probability lying above the truncation.
inline Eigen::VectorXcd coherent_amplitudes(Complex alpha, std::size_t truncation, double* tail = nullptr) {
  Eigen::VectorXcd c(static_cast<Eigen::Index>(truncation + 1));
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (std::size_t n = 1; n <= truncation; ++n) {
    c(static_cast<Eigen::Index>(n)) = c(static_cast<Eigen::Index>(n - 1)) * alpha / std::sqrt(static_cast<double>(n));
  }
  if (tail) *tail = std::max(0.0, 1.0 - c.squaredNorm());
  return c;
}

/// Phase-averaged pair of coherent states with opposite phases,
///   |Psi> ~ int_0^{2 pi} |r0 e^{i s}>_a |r0 e^{-i s}>_b ds,
/// which integrates to c[n][n] ~ r0^{2n} / n! with no off-diagonal terms.
inline FockTwoMode pair_coherent_state(double r0, std::size_t truncation, double tail_bound = kDefaultTailBound) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw std::domain_error("pair_coherent_state: r0 must be positive");
  const auto dim = static_cast<Eigen::Index>(truncation + 1);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  // Work with weights w_n = c_n^2 = r0^{4n} / (n!)^2 relative to w_0.
  const double x = r0 * r0;
  std::vector<double> amp(truncation + 2);
  amp[0] = 1.0;
  for (std::size_t n = 1; n < amp.size(); ++n) amp[n] = amp[n - 1] * x / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t n = 0; n <= truncation; ++n) total += amp[n] * amp[n];
  // First omitted weight, with the geometric bound on everything after it.
  const double next = amp[truncation + 1] * amp[truncation + 1];
  const double ratio = (x * x) / std::pow(static_cast<double>(truncation + 2), 2);
  const double tail = ratio < 1.0 ? next / (1.0 - ratio) / (total + next) : 1.0;
  check_tail(tail, tail_bound, "pair_coherent_state");
  for (std::size_t n = 0; n <= truncation; ++n) c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = amp[n];
  return FockTwoMode::pure(std::move(c), tail);
}

/// U = exp(s (a^dag b^dag - a b)) on the truncated space. The generator only
/// connects (n, m) to (n+1, m+1), so it is exponentiated block by block over
/// fixed n - m. The truncated generator is real antisymmetric, so the
/// result is exactly orthogonal.
inline Eigen::MatrixXcd apply_two_mode_squeezer(const Eigen::MatrixXcd& coeffs, double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("apply_two_mode_squeezer: non-finite s");
  const auto dim = coeffs.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index d = -(dim - 1); d <= dim - 1; ++d) {
    const Eigen::Index n0 = std::max<Eigen::Index>(d, 0);
    const Eigen::Index m0 = std::max<Eigen::Index>(-d, 0);
    const Eigen::Index len = dim - std::abs(d);
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(len, len);
    for (Eigen::Index k = 0; k + 1 < len; ++k) {
      const double n = static_cast<double>(n0 + k);
      const double m = static_cast<double>(m0 + k);
      const double el = std::sqrt((n + 1.0) * (m + 1.0));
      gen(k + 1, k) = el;
      gen(k, k + 1) = -el;
    }
    const Eigen::MatrixXd u = (s * gen).exp();
    Eigen::VectorXcd v(len);
    for (Eigen::Index k = 0; k < len; ++k) v(k) = coeffs(n0 + k, m0 + k);
    const Eigen::VectorXcd w = u.cast<Complex>() * v;
    for (Eigen::Index k = 0; k < len; ++k) out(n0 + k, m0 + k) = w(k);
  }
  return out;
}

/// Probability held in the outermost `levels` Fock levels of either mode,
/// used as a leakage proxy after evolution on the truncated space.
inline double edge_mass(const Eigen::MatrixXcd& c, Eigen::Index levels = 2) {
  const auto dim = c.rows();
  double m = 0.0;
  for (Eigen::Index n = 0; n < dim; ++n) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      if (n >= dim - levels || k >= dim - levels) m += std::norm(c(n, k));
    }
  }
  return m;
}

/// Two-mode cat state |alpha0>|beta0> + |-alpha0>|-beta0> sent through the
/// parametric amplifier for gain kappa_t.
inline FockTwoMode evolved_cat_state(double alpha0, double beta0, double kappa_t, std::size_t truncation,
                                     double tail_bound = kDefaultTailBound) {
  if (!std::isfinite(alpha0) || !std::isfinite(beta0) || !std::isfinite(kappa_t)) {
    throw std::invalid_argument("evolved_cat_state: non-finite parameters");
  }
  double ta = 0.0, tb = 0.0;
  const Eigen::VectorXcd a_plus = coherent_amplitudes(alpha0, truncation, &ta);
  const Eigen::VectorXcd b_plus = coherent_amplitudes(beta0, truncation, &tb);
  const Eigen::VectorXcd a_minus = coherent_amplitudes(-alpha0, truncation);
  const Eigen::VectorXcd b_minus = coherent_amplitudes(-beta0, truncation);
  Eigen::MatrixXcd c = a_plus * b_plus.transpose() + a_minus * b_minus.transpose();
  const double norm = c.norm();
  if (!(norm > 0.0)) throw std::domain_error("evolved_cat_state: superposition vanishes");
  c /= norm;
  const double before = c.squaredNorm();
  c = apply_two_mode_squeezer(c, kappa_t);
  const double drift = std::abs(c.squaredNorm() - before);
  if (drift > 1e-8) throw std::runtime_error("evolved_cat_state: norm drift after exponential");
  const double tail = ta + tb + edge_mass(c);
  check_tail(tail, tail_bound, "evolved_cat_state");
  return FockTwoMode::pure(std::move(c), tail);
}

/// Rotates mode a by delta: c[n][m] -> e^{i n delta} c[n][m] (a -> a e^{i delta}).
inline FockTwoMode phase_rotate(const FockTwoMode& state, double delta) {
  return state.map_components([delta](const Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd out = c;
    for (Eigen::Index n = 0; n < c.rows(); ++n) {
      out.row(n) *= std::exp(Complex(0.0, delta * static_cast<double>(n)));
    }
    return out;
  });
}

/// Alice's signal: a 180 degree shift of mode a, c[n][m] -> (-1)^n c[n][m].
inline FockTwoMode phase_encode(const FockTwoMode& state, bool shifted) {
  if (!shifted) return state;
  return state.map_components([](const Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd out = c;
    for (Eigen::Index n = 1; n < c.rows(); n += 2) out.row(n) *= -1.0;
    return out;
  });
}

/// Kraus operators of pure loss with intensity transmission eta,
///   A_k = sum_n sqrt(C(n, k)) eta^{(n-k)/2} (1-eta)^{k/2} |n-k><n|.
inline std::vector<Eigen::MatrixXd> loss_kraus_operators(double eta, std::size_t truncation) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("loss: eta must lie in [0, 1]");
  const auto dim = static_cast<Eigen::Index>(truncation + 1);
  std::vector<Eigen::MatrixXd> ops;
  for (Eigen::Index k = 0; k < dim; ++k) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index n = k; n < dim; ++n) {
      // sqrt(C(n,k)) via lgamma to stay finite at large n.
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      const double t = (eta > 0.0 || n == k) ? (n == k ? 1.0 : std::pow(eta, 0.5 * static_cast<double>(n - k))) : 0.0;
      const double r = (k == 0) ? 1.0 : std::pow(1.0 - eta, 0.5 * static_cast<double>(k));
      a(n - k, n) = std::exp(0.5 * log_binom) * t * r;
    }
    ops.push_back(std::move(a));
  }
  return ops;
}

namespace detail {

// Re-expresses an ensemble with more components than the Hilbert-space
// dimension through the eigen-decomposition of its density matrix.
inline std::vector<Eigen::MatrixXcd> compress_components(const FockTwoMode& state, double drop_below) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(state.density_matrix());
  std::vector<Eigen::MatrixXcd> out;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda <= drop_below) continue;
    const Eigen::VectorXcd v = solver.eigenvectors().col(k) * std::sqrt(lambda);
    Eigen::MatrixXcd c(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
      for (Eigen::Index m = 0; m < d; ++m) c(n, m) = v(n * d + m);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

/// Independent pure-loss channels on both modes (intensity transmissions
/// eta_a, eta_b). Components with weight below 1e-18 are dropped and their
/// weight added to tail_mass.
inline FockTwoMode apply_fock_loss(const FockTwoMode& state, double eta_a, double eta_b) {
  const auto ka = loss_kraus_operators(eta_a, state.truncation());
  const auto kb = loss_kraus_operators(eta_b, state.truncation());
  constexpr double kDrop = 1e-18;
  std::vector<Eigen::MatrixXcd> comps;
  double dropped = 0.0;
  for (const auto& c : state.components()) {
    for (const auto& a : ka) {
      const Eigen::MatrixXcd ac = a.cast<Complex>() * c;
      if (ac.squaredNorm() <= kDrop) {
        dropped += ac.squaredNorm();
        continue;
      }
      for (const auto& b : kb) {
        Eigen::MatrixXcd v = ac * b.transpose().cast<Complex>();
        const double w = v.squaredNorm();
        if (w <= kDrop) {
          dropped += w;
          continue;
        }
        comps.push_back(std::move(v));
      }
    }
  }
  const double tail = state.tail_mass() + dropped;
  FockTwoMode out = FockTwoMode::mixed(std::move(comps), tail);
  if (out.components().size() > out.dim() * out.dim()) {
    out = FockTwoMode::mixed(detail::compress_components(out, kDrop), tail);
  }
  return out;
}

inline FockTwoMode apply_fock_loss(const FockTwoMode& state, double eta) { return apply_fock_loss(state, eta, eta); }

/// Intensity transmission for an amplitude (field) efficiency.
inline double amplitude_to_intensity(double eta_amplitude) {
  if (!(eta_amplitude >= 0.0 && eta_amplitude <= 1.0)) throw std::domain_error("amplitude efficiency must lie in [0, 1]");
  return eta_amplitude * eta_amplitude;
}

}  // namespace eprqkd
