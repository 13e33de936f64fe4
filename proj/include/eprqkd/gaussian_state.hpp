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

// Gaussian states of M bosonic modes in the quadrature convention
//   X = a + a^dagger,  P = (a - a^dagger) / i,
// so the vacuum has unit variance in every quadrature and the uncertainty
// relation reads Var(X) Var(P) >= 1. Phase-space vectors are ordered
// (x1, p1, x2, p2, ...).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eprqkd/rng.hpp"

namespace eprqkd {

enum class Quadrature { X, P };

inline const char* to_string(Quadrature q) { return q == Quadrature::X ? "X" : "P"; }

inline Quadrature other(Quadrature q) { return q == Quadrature::X ? Quadrature::P : Quadrature::X; }

/// Symplectic form for n modes: block diagonal with [[0, 1], [-1, 0]].
inline Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0) {
      throw std::invalid_argument("GaussianState: mean length must be a positive even number");
    }
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
      throw std::invalid_argument("GaussianState: covariance shape does not match mean");
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
      throw std::invalid_argument("GaussianState: non-finite moments");
    }
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("GaussianState: covariance is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose());
  }

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  static std::size_t index(std::size_t mode, Quadrature q) { return 2 * mode + (q == Quadrature::X ? 0 : 1); }

  /// Smallest eigenvalue of cov + i*Omega; non-negative for physical states.
  double uncertainty_margin() const {
    const auto n = mean_.size();
    Eigen::MatrixXcd h(n, n);
    const Eigen::MatrixXd omega = symplectic_form(n_modes());
    h.real() = cov_;
    h.imag() = omega;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  bool is_physical(double tol = 1e-10) const { return uncertainty_margin() >= -tol; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Affine symplectic map r -> S r + d acting on all modes of a state.
struct SymplecticOp {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd displacement;

  bool is_symplectic(double tol = 1e-10) const {
    const auto n = static_cast<std::size_t>(matrix.rows() / 2);
    const Eigen::MatrixXd omega = symplectic_form(n);
    return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff() <= tol;
  }

  GaussianState apply(const GaussianState& s) const {
    if (matrix.rows() != s.mean().size()) throw std::invalid_argument("SymplecticOp: dimension mismatch");
    return GaussianState(matrix * s.mean() + displacement, matrix * s.cov() * matrix.transpose());
  }

  static SymplecticOp identity(std::size_t n_modes) {
    return {Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes), Eigen::VectorXd::Zero(2 * n_modes)};
  }
};

namespace detail {

inline void check_mode(const GaussianState& s, std::size_t mode, const char* what) {
  if (mode >= s.n_modes()) {
    throw std::out_of_range(std::string(what) + ": mode " + std::to_string(mode) + " out of range for " +
                            std::to_string(s.n_modes()) + "-mode state");
  }
}

inline void check_unit_interval(double eta, const char* what) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::domain_error(std::string(what) + ": transmittance must lie in [0, 1], got " + std::to_string(eta));
  }
}

// Embeds a 4x4 two-mode map (ordering x1, p1, x2, p2) into an n-mode op.
inline SymplecticOp embed_two_mode(std::size_t n_modes, std::size_t m1, std::size_t m2, const Eigen::Matrix4d& block) {
  SymplecticOp op = SymplecticOp::identity(n_modes);
  const std::size_t idx[4] = {2 * m1, 2 * m1 + 1, 2 * m2, 2 * m2 + 1};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) op.matrix(idx[r], idx[c]) = block(r, c);
  }
  return op;
}

}  // namespace detail

inline GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) throw std::invalid_argument("vacuum_state: n_modes must be >= 1");
  return GaussianState(Eigen::VectorXd::Zero(2 * n_modes), Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

/// Single-mode squeezed vacuum with Var(X) = 1/r and Var(P) = r (r >= 1
/// squeezes X). Squeezing parameters are variance ratios throughout.
inline GaussianState squeezed_vacuum(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("squeezed_vacuum: r must be positive");
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 1.0 / r;
  cov(1, 1) = r;
  return GaussianState(Eigen::VectorXd::Zero(2), cov);
}

/// Joint state of two independent systems; modes of `second` follow those of `first`.
inline GaussianState tensor_product(const GaussianState& first, const GaussianState& second) {
  const auto n1 = first.mean().size();
  const auto n2 = second.mean().size();
  Eigen::VectorXd mean(n1 + n2);
  mean << first.mean(), second.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  cov.topLeftCorner(n1, n1) = first.cov();
  cov.bottomRightCorner(n2, n2) = second.cov();
  return GaussianState(std::move(mean), std::move(cov));
}

/// Coherent displacement by amplitude*e^{i phase}: shifts <X> by 2 a cos(phase)
/// and <P> by 2 a sin(phase).
inline GaussianState displace_coherent(const GaussianState& s, std::size_t mode, double amplitude, double phase) {
  detail::check_mode(s, mode, "displace_coherent");
  if (!std::isfinite(amplitude) || !std::isfinite(phase)) throw std::invalid_argument("displace_coherent: non-finite");
  SymplecticOp op = SymplecticOp::identity(s.n_modes());
  op.displacement(2 * mode) = 2.0 * amplitude * std::cos(phase);
  op.displacement(2 * mode + 1) = 2.0 * amplitude * std::sin(phase);
  return op.apply(s);
}

/// Nondegenerate parametric amplifier with gain parameter s = kappa*t:
///   X_a -> X_a cosh s + X_b sinh s,  P_a -> P_a cosh s - P_b sinh s,
/// and symmetrically for b.
inline SymplecticOp two_mode_squeeze_op(std::size_t n_modes, std::size_t mode_a, std::size_t mode_b, double s) {
  const double c = std::cosh(s);
  const double sh = std::sinh(s);
  Eigen::Matrix4d block;
  // clang-format off
  block << c,  0,   sh,  0,
           0,  c,   0,  -sh,
           sh, 0,   c,   0,
           0, -sh,  0,   c;
  // clang-format on
  return detail::embed_two_mode(n_modes, mode_a, mode_b, block);
}

inline GaussianState two_mode_squeeze(const GaussianState& state, std::size_t mode_a, std::size_t mode_b, double s) {
  detail::check_mode(state, mode_a, "two_mode_squeeze");
  detail::check_mode(state, mode_b, "two_mode_squeeze");
  if (mode_a == mode_b) throw std::invalid_argument("two_mode_squeeze: modes must differ");
  if (!std::isfinite(s)) throw std::invalid_argument("two_mode_squeeze: non-finite gain");
  return two_mode_squeeze_op(state.n_modes(), mode_a, mode_b, s).apply(state);
}

/// Beamsplitter with intensity transmittance eta, with the sign convention
///   out_1 = sqrt(eta) in_1 + sqrt(1-eta) in_2
///   out_2 = sqrt(1-eta) in_1 - sqrt(eta) in_2
/// applied identically to X and P.
inline SymplecticOp beamsplitter_op(std::size_t n_modes, std::size_t mode_1, std::size_t mode_2, double eta) {
  detail::check_unit_interval(eta, "beamsplitter");
  const double t = std::sqrt(eta);
  const double r = std::sqrt(1.0 - eta);
  Eigen::Matrix4d block;
  // clang-format off
  block << t, 0,  r,  0,
           0, t,  0,  r,
           r, 0, -t,  0,
           0, r,  0, -t;
  // clang-format on
  return detail::embed_two_mode(n_modes, mode_1, mode_2, block);
}

inline GaussianState beamsplitter(const GaussianState& state, std::size_t mode_1, std::size_t mode_2, double eta) {
  detail::check_mode(state, mode_1, "beamsplitter");
  detail::check_mode(state, mode_2, "beamsplitter");
  if (mode_1 == mode_2) throw std::invalid_argument("beamsplitter: modes must differ");
  return beamsplitter_op(state.n_modes(), mode_1, mode_2, eta).apply(state);
}

/// Rotates the (x, p) block of one mode counter-clockwise by theta (a -> a e^{i theta}).
inline GaussianState phase_shift(const GaussianState& state, std::size_t mode, double theta) {
  detail::check_mode(state, mode, "phase_shift");
  SymplecticOp op = SymplecticOp::identity(state.n_modes());
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  op.matrix(2 * mode, 2 * mode) = c;
  op.matrix(2 * mode, 2 * mode + 1) = -s;
  op.matrix(2 * mode + 1, 2 * mode) = s;
  op.matrix(2 * mode + 1, 2 * mode + 1) = c;
  return op.apply(state);
}

/// Pure-loss channel of intensity transmission eta on one mode: mixes the
/// mode with vacuum on a beamsplitter and discards the reflected port.
inline GaussianState apply_loss(const GaussianState& state, std::size_t mode, double eta) {
  detail::check_mode(state, mode, "apply_loss");
  detail::check_unit_interval(eta, "apply_loss");
  const double amp = std::sqrt(eta);
  Eigen::VectorXd mean = state.mean();
  Eigen::MatrixXd cov = state.cov();
  const auto i = static_cast<Eigen::Index>(2 * mode);
  mean.segment(i, 2) *= amp;
  cov.middleRows(i, 2) *= amp;
  cov.middleCols(i, 2) *= amp;
  cov(i, i) += 1.0 - eta;
  cov(i + 1, i + 1) += 1.0 - eta;
  return GaussianState(std::move(mean), std::move(cov));
}

struct Moments {
  double mean;
  double variance;
};

inline Moments marginal_moments(const GaussianState& state, std::size_t mode, Quadrature q) {
  detail::check_mode(state, mode, "marginal_moments");
  const auto i = GaussianState::index(mode, q);
  return {state.mean()(i), state.cov()(i, i)};
}

/// Joint distribution of one commuting quadrature per listed mode, factored
/// for sampling: values = mean + factor * z with z standard normal.
class QuadratureSampler {
 public:
  struct Selection {
    std::size_t mode;
    Quadrature quadrature;
  };

  QuadratureSampler(const GaussianState& state, std::span<const Selection> selection) {
    const auto k = static_cast<Eigen::Index>(selection.size());
    if (k == 0) throw std::invalid_argument("QuadratureSampler: empty selection");
    std::vector<std::size_t> idx;
    for (const auto& sel : selection) {
      detail::check_mode(state, sel.mode, "QuadratureSampler");
      for (const auto& prev : idx) {
        if (prev / 2 == sel.mode) throw std::invalid_argument("QuadratureSampler: one quadrature per mode");
      }
      idx.push_back(GaussianState::index(sel.mode, sel.quadrature));
    }
    mean_.resize(k);
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      mean_(r) = state.mean()(idx[r]);
      for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = state.cov()(idx[r], idx[c]);
    }
    // Spectral factorization tolerates the numerically semidefinite
    // covariances produced by total loss.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
    Eigen::VectorXd lambda = solver.eigenvalues();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (lambda(j) < -1e-10) {
        throw std::domain_error("QuadratureSampler: selected covariance is not positive semidefinite");
      }
      lambda(j) = std::sqrt(std::max(lambda(j), 0.0));
    }
    factor_ = solver.eigenvectors() * lambda.asDiagonal();
  }

  std::size_t size() const { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }

  /// Writes one joint draw into `out` (length size()).
  void draw(RandomStream& rng, std::span<double> out) const {
    const auto k = mean_.size();
    double z[8];
    Eigen::VectorXd zz;
    double* zp = z;
    if (k > 8) {
      zz.resize(k);
      zp = zz.data();
    }
    for (Eigen::Index j = 0; j < k; ++j) zp[j] = rng.normal();
    for (Eigen::Index r = 0; r < k; ++r) {
      double v = mean_(r);
      for (Eigen::Index c = 0; c < k; ++c) v += factor_(r, c) * zp[c];
      out[static_cast<std::size_t>(r)] = v;
    }
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;
};

/// Draws n_samples joint homodyne outcomes, one quadrature per mode.
/// Rows are generated in blocks of kRoundsPerStream, each from its own
/// stream, so the result depends only on (state, bases, n_samples, seed).
inline Eigen::MatrixXd sample_quadratures(const GaussianState& state, std::span<const Quadrature> basis_per_mode,
                                          std::size_t n_samples, std::uint64_t seed) {
  if (basis_per_mode.size() != state.n_modes()) {
    throw std::invalid_argument("sample_quadratures: need exactly one basis per mode");
  }
  if (n_samples == 0) throw std::invalid_argument("sample_quadratures: n_samples must be >= 1");
  std::vector<QuadratureSampler::Selection> sel;
  for (std::size_t m = 0; m < state.n_modes(); ++m) sel.push_back({m, basis_per_mode[m]});
  const QuadratureSampler sampler(state, sel);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(state.n_modes()));
  std::vector<double> row(state.n_modes());
  for (std::size_t block = 0; block * kRoundsPerStream < n_samples; ++block) {
    RandomStream rng(seed, block, StreamTag::kSampling);
    const std::size_t end = std::min(n_samples, (block + 1) * kRoundsPerStream);
    for (std::size_t i = block * kRoundsPerStream; i < end; ++i) {
      sampler.draw(rng, row);
      for (std::size_t m = 0; m < row.size(); ++m) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = row[m];
    }
  }
  return out;
}

}  // namespace eprqkd
