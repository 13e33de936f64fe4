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

// Sign-binned quadrature statistics of two-mode Fock states and the strong
// Bell-Clauser-Horne ratio
//   S = [P++(t, f) - P++(t, f') + P++(t', f) + P++(t', f')] / [P+A(t') + P+B(f)],
// which is at most 1 for any local hidden variable model.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eprqkd/fock_state.hpp"
#include "eprqkd/halfaxis.hpp"
#include "eprqkd/rng.hpp"

namespace eprqkd {

inline constexpr double kProbabilityTol = 1e-9;

struct AngleSet {
  double theta = 0.0;
  double theta_prime = 0.0;
  double phi = 0.0;
  double phi_prime = 0.0;
};

/// Violation angles for the pair-coherent state.
inline AngleSet pair_coherent_angles() {
  constexpr double pi = std::numbers::pi;
  return {0.0, pi / 2.0, -pi / 4.0, -3.0 * pi / 4.0};
}

/// Violation angles for the evolved cat state.
inline AngleSet cat_state_angles() {
  constexpr double pi = std::numbers::pi;
  return {0.42 * pi, -0.28 * pi, -0.28 * pi, 0.42 * pi};
}

struct SignProbabilities {
  double p_plus_a = 0.0;
  double p_plus_b = 0.0;
  double p_joint = 0.0;
};

struct BellOutcome {
  double p_plus_a_theta_prime = 0.0;
  double p_plus_b_phi = 0.0;
  // (t, f), (t, f'), (t', f), (t', f')
  std::array<double, 4> p_joint{};
  double S = 0.0;
};

/// D(theta)[n][m] = e^{i (n - m) theta} M[n][m] for a real overlap matrix M.
inline Eigen::MatrixXcd rotate_overlaps(const Eigen::MatrixXd& m, double theta) {
  Eigen::MatrixXcd d(m.rows(), m.cols());
  for (Eigen::Index n = 0; n < m.rows(); ++n) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double ph = static_cast<double>(n - k) * theta;
      d(n, k) = m(n, k) * Complex(std::cos(ph), std::sin(ph));
    }
  }
  return d;
}

namespace detail {

inline double checked_probability(double p, const char* what) {
  if (!std::isfinite(p) || p < -kProbabilityTol || p > 1.0 + kProbabilityTol) {
    throw std::domain_error(std::string(what) + ": probability " + std::to_string(p) + " outside [0, 1]");
  }
  return std::clamp(p, 0.0, 1.0);
}

// tr[rho (A (x) B)] with A acting on mode a and B on mode b.
inline double expectation(const FockTwoMode& state, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Complex acc = 0.0;
  for (const auto& c : state.components()) {
    acc += (c.conjugate().cwiseProduct(a * c * b.transpose())).sum();
  }
  return acc.real();
}

inline double expectation_a(const FockTwoMode& state, const Eigen::MatrixXcd& a) {
  Complex acc = 0.0;
  for (const auto& c : state.components()) acc += (c.conjugate().cwiseProduct(a * c)).sum();
  return acc.real();
}

inline double expectation_b(const FockTwoMode& state, const Eigen::MatrixXcd& b) {
  Complex acc = 0.0;
  for (const auto& c : state.components()) acc += (c.conjugate().cwiseProduct(c * b.transpose())).sum();
  return acc.real();
}

inline void check_table(const FockTwoMode& state, const HalfAxisTable& table) {
  if (table.truncation() != state.truncation()) {
    throw std::invalid_argument("projector table truncation does not match the state");
  }
}

}  // namespace detail

/// P(X_theta >= 0 on a), P(X_phi >= 0 on b) and the joint probability.
inline SignProbabilities sign_probabilities(const FockTwoMode& state, const HalfAxisTable& table, double theta,
                                            double phi) {
  detail::check_table(state, table);
  const Eigen::MatrixXcd da = table.projector(theta);
  const Eigen::MatrixXcd db = table.projector(phi);
  SignProbabilities p;
  p.p_plus_a = detail::checked_probability(detail::expectation_a(state, da), "sign_probabilities");
  p.p_plus_b = detail::checked_probability(detail::expectation_b(state, db), "sign_probabilities");
  p.p_joint = detail::checked_probability(detail::expectation(state, da, db), "sign_probabilities");
  return p;
}

inline SignProbabilities sign_probabilities(const FockTwoMode& state, double theta, double phi) {
  return sign_probabilities(state, HalfAxisTable(state.truncation()), theta, phi);
}

inline double ch_ratio(const std::array<double, 4>& p_joint, double p_plus_a_theta_prime, double p_plus_b_phi) {
  const double den = p_plus_a_theta_prime + p_plus_b_phi;
  if (!(den > 0.0)) throw std::domain_error("bell_S: zero denominator P+A(theta') + P+B(phi)");
  return (p_joint[0] - p_joint[1] + p_joint[2] + p_joint[3]) / den;
}

inline BellOutcome bell_S(const FockTwoMode& state, const HalfAxisTable& table, const AngleSet& angles) {
  detail::check_table(state, table);
  const Eigen::MatrixXcd dt = table.projector(angles.theta);
  const Eigen::MatrixXcd dtp = table.projector(angles.theta_prime);
  const Eigen::MatrixXcd df = table.projector(angles.phi);
  const Eigen::MatrixXcd dfp = table.projector(angles.phi_prime);
  BellOutcome out;
  auto prob = [](double v) { return detail::checked_probability(v, "bell_S"); };
  out.p_plus_a_theta_prime = prob(detail::expectation_a(state, dtp));
  out.p_plus_b_phi = prob(detail::expectation_b(state, df));
  out.p_joint[0] = prob(detail::expectation(state, dt, df));
  out.p_joint[1] = prob(detail::expectation(state, dt, dfp));
  out.p_joint[2] = prob(detail::expectation(state, dtp, df));
  out.p_joint[3] = prob(detail::expectation(state, dtp, dfp));
  if (out.p_joint[2] > std::min(out.p_plus_a_theta_prime, out.p_plus_b_phi) + kProbabilityTol ||
      out.p_joint[0] > out.p_plus_b_phi + kProbabilityTol || out.p_joint[3] > out.p_plus_a_theta_prime + kProbabilityTol) {
    throw std::domain_error("bell_S: joint probability exceeds a marginal");
  }
  out.S = ch_ratio(out.p_joint, out.p_plus_a_theta_prime, out.p_plus_b_phi);
  return out;
}

inline BellOutcome bell_S(const FockTwoMode& state, const AngleSet& angles) {
  return bell_S(state, HalfAxisTable(state.truncation()), angles);
}

// ---------------------------------------------------------------------------
// Scenario description shared by the CLI and the acceptance runs.

enum class BellStateKind { PairCoherent, Cat };

inline const char* to_string(BellStateKind k) { return k == BellStateKind::PairCoherent ? "pair-coherent" : "cat"; }

struct BellSpec {
  BellStateKind kind = BellStateKind::PairCoherent;
  double r0 = 1.1;
  double alpha0 = 0.9;
  double beta0 = 0.9;
  double kappa_t = 0.6;
  std::size_t truncation = 40;
  double loss_eta = 1.0;  // intensity transmission applied to both modes
  bool shifted = false;   // 180 degree phase encoding on mode a
  AngleSet angles = pair_coherent_angles();
  double tail_bound = kDefaultTailBound;
};

inline BellSpec default_bell_spec(BellStateKind kind) {
  BellSpec s;
  s.kind = kind;
  if (kind == BellStateKind::Cat) {
    s.truncation = 30;
    s.angles = cat_state_angles();
  }
  return s;
}

inline FockTwoMode build_bell_state(const BellSpec& spec, std::size_t truncation) {
  FockTwoMode s = spec.kind == BellStateKind::PairCoherent
                      ? pair_coherent_state(spec.r0, truncation, spec.tail_bound)
                      : evolved_cat_state(spec.alpha0, spec.beta0, spec.kappa_t, truncation, spec.tail_bound);
  s = phase_encode(s, spec.shifted);
  if (spec.loss_eta < 1.0) s = apply_fock_loss(s, spec.loss_eta);
  return s;
}

struct BellReport {
  BellSpec spec;
  BellOutcome outcome;
  double tail_mass = 0.0;
  double S_refined = 0.0;          // S at truncation + 10
  double convergence_delta = 0.0;  // |S(N + 10) - S(N)|
};

/// S at the requested truncation plus the change when ten more levels are kept.
inline BellReport evaluate_bell(const BellSpec& spec) {
  if (spec.truncation == 0) throw std::invalid_argument("evaluate_bell: truncation must be positive");
  BellReport r;
  r.spec = spec;
  const FockTwoMode s = build_bell_state(spec, spec.truncation);
  r.tail_mass = s.tail_mass();
  r.outcome = bell_S(s, spec.angles);
  const FockTwoMode fine = build_bell_state(spec, spec.truncation + 10);
  r.S_refined = bell_S(fine, spec.angles).S;
  r.convergence_delta = std::abs(r.S_refined - r.outcome.S);
  return r;
}

// ---------------------------------------------------------------------------
// Factorized (local hidden variable) models.

/// One hidden-variable value: its weight and each side's +1 probabilities at
/// the two local settings, indices {theta, theta'} and {phi, phi'}.
struct LhvComponent {
  double weight = 1.0;
  std::array<double, 2> p_a{};
  std::array<double, 2> p_b{};
};

inline double lhv_factorized_S(const std::vector<LhvComponent>& model) {
  if (model.empty()) throw std::invalid_argument("lhv_factorized_S: empty model");
  double wsum = 0.0;
  std::array<double, 4> joint{};
  double pa_tp = 0.0, pb_f = 0.0;
  for (const auto& c : model) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw std::domain_error("lhv_factorized_S: bad weight");
    for (double p : {c.p_a[0], c.p_a[1], c.p_b[0], c.p_b[1]}) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("lhv_factorized_S: probability outside [0, 1]");
    }
    wsum += c.weight;
    joint[0] += c.weight * c.p_a[0] * c.p_b[0];
    joint[1] += c.weight * c.p_a[0] * c.p_b[1];
    joint[2] += c.weight * c.p_a[1] * c.p_b[0];
    joint[3] += c.weight * c.p_a[1] * c.p_b[1];
    pa_tp += c.weight * c.p_a[1];
    pb_f += c.weight * c.p_b[0];
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw std::domain_error("lhv_factorized_S: weights must sum to 1");
  return ch_ratio(joint, pa_tp, pb_f);
}

/// Projector onto x_lo <= X_theta < x_hi for one mode.
inline Eigen::MatrixXcd bin_projector(double theta, double x_lo, double x_hi, std::size_t truncation) {
  return rotate_overlaps(interval_overlaps(x_lo, x_hi, truncation), theta);
}

/// Bin edges covering the real line at this truncation: the outer edges sit
/// at the integration cutoff, the inner ones every `width` inside +-inner.
inline std::vector<double> default_bin_edges(std::size_t truncation, double inner = 6.0, double width = 0.5) {
  const double cut = halfaxis_cutoff(truncation);
  std::vector<double> e{-cut};
  for (double x = -inner; x <= inner + 1e-12; x += width) e.push_back(x);
  e.push_back(cut);
  return e;
}

/// Eve intercepts mode a, measures X_theta0 (binned by `edges`) and forwards
/// a coherent state |beta> in its place. Each bin outcome is one hidden
/// variable: weight P(bin), Bob's side conditioned on it, Alice's side fixed
/// by the forwarded state.
inline std::vector<LhvComponent> intercept_resend_surrogate(const FockTwoMode& state, const AngleSet& angles,
                                                            double theta0, Complex beta,
                                                            const std::vector<double>& edges) {
  if (edges.size() < 2) throw std::invalid_argument("intercept_resend_surrogate: need at least one bin");
  const std::size_t n = state.truncation();
  const HalfAxisTable table(n);
  const Eigen::MatrixXcd df = table.projector(angles.phi);
  const Eigen::MatrixXcd dfp = table.projector(angles.phi_prime);

  const Eigen::VectorXcd fwd = coherent_amplitudes(beta, n);
  auto pa = [&](double th) {
    const Complex v = fwd.adjoint() * table.projector(th) * fwd;
    return std::clamp(v.real() / fwd.squaredNorm(), 0.0, 1.0);
  };
  const std::array<double, 2> p_a{pa(angles.theta), pa(angles.theta_prime)};

  std::vector<LhvComponent> model;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const Eigen::MatrixXcd bin = bin_projector(theta0, edges[k], edges[k + 1], n);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(bin.rows(), bin.cols());
    const double w = detail::expectation(state, bin, id);
    if (w <= 1e-15) continue;
    LhvComponent c;
    c.weight = w;
    c.p_a = p_a;
    c.p_b = {std::clamp(detail::expectation(state, bin, df) / w, 0.0, 1.0),
             std::clamp(detail::expectation(state, bin, dfp) / w, 0.0, 1.0)};
    model.push_back(c);
    total += w;
  }
  for (auto& c : model) c.weight /= total;
  // Absorb the rounding residue so the weights sum to 1 exactly enough.
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < model.size(); ++k) s += model[k].weight;
  model.back().weight = 1.0 - s;
  return model;
}

// ---------------------------------------------------------------------------
// Block decoding of the phase-encoded bit from joint histograms.

/// Cell probabilities of (X_theta on a, X_phi on b) over edges x edges,
/// row-major with mode a as the row.
inline std::vector<double> reference_histogram(const FockTwoMode& state, double theta, double phi,
                                               const std::vector<double>& edges) {
  const std::size_t n = state.truncation();
  const std::size_t bins = edges.size() - 1;
  std::vector<Eigen::MatrixXd> overlaps;
  for (std::size_t k = 0; k < bins; ++k) overlaps.push_back(interval_overlaps(edges[k], edges[k + 1], n));
  std::vector<double> out(bins * bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const Eigen::MatrixXcd pa = rotate_overlaps(overlaps[i], theta);
    for (std::size_t j = 0; j < bins; ++j) {
      out[i * bins + j] = std::max(0.0, detail::expectation(state, pa, rotate_overlaps(overlaps[j], phi)));
    }
  }
  return out;
}

/// Sums a bins x bins joint histogram over mode a, leaving mode b's marginal.
inline std::vector<double> marginal_b(const std::vector<double>& joint, std::size_t bins) {
  if (joint.size() != bins * bins) throw std::invalid_argument("marginal_b: size mismatch");
  std::vector<double> m(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < bins; ++j) m[j] += joint[i * bins + j];
  }
  return m;
}

/// Draws `n` cell indices from `probs` and returns the count per cell.
inline std::vector<std::uint64_t> sample_histogram(const std::vector<double>& probs, std::size_t n, std::uint64_t seed,
                                                   std::uint64_t stream = 0) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) cdf[k] = acc += probs[k];
  RandomStream rng(seed, stream, StreamTag::kBlockDecode);
  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), probs.size() - 1)];
  }
  return counts;
}

struct BlockDecision {
  int bit = 0;       // 0: unshifted reference wins, 1: shifted
  double llr = 0.0;  // log L(unshifted) - log L(shifted)
};

/// Maximum-likelihood choice between two reference shapes. Cells are floored
/// at 1e-300 so an empty reference cell costs a large but finite penalty.
inline BlockDecision block_decode(const std::vector<std::uint64_t>& counts, const std::vector<double>& ref_unshifted,
                                  const std::vector<double>& ref_shifted) {
  if (counts.size() != ref_unshifted.size() || counts.size() != ref_shifted.size()) {
    throw std::invalid_argument("block_decode: histograms must share a grid");
  }
  std::uint64_t total = 0;
  BlockDecision d;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!counts[k]) continue;
    total += counts[k];
    d.llr += static_cast<double>(counts[k]) *
             (std::log(std::max(ref_unshifted[k], 1e-300)) - std::log(std::max(ref_shifted[k], 1e-300)));
  }
  if (total == 0) throw std::invalid_argument("block_decode: empty block");
  d.bit = d.llr >= 0.0 ? 0 : 1;
  return d;
}

}  // namespace eprqkd
