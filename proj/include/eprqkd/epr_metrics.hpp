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

// EPR inference variances. Mode a's quadratures are inferred from mode b's:
//   delta_x = X_a - gamma_x X_b,   delta_p = P_a + gamma_p P_b,
// each gamma chosen to minimise the variance of delta. The pair is EPR
// correlated when Var(delta_x) * Var(delta_p) < 1.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "eprqkd/gaussian_state.hpp"

namespace eprqkd {

struct InferenceResult {
  double gamma_x = 0.0;
  double gamma_p = 0.0;
  double var_x_inf = 0.0;
  double var_p_inf = 0.0;
  double product = 0.0;
  double stderr_product = 0.0;  // 0 for analytic results
  double stderr_var_x = 0.0;
  double stderr_var_p = 0.0;
  std::size_t n_pairs_x = 0;  // 0 for analytic results
  std::size_t n_pairs_p = 0;
};

/// Measured fluctuations for one basis; a_values are the inferred party
/// (Bob), b_values the inferring party (Alice). Optional strata label rounds
/// whose means may differ (Alice uses her sent bit); covariances are then
/// pooled within strata.
struct PairedSamples {
  Quadrature basis = Quadrature::X;
  std::vector<double> a_values;
  std::vector<double> b_values;
  std::vector<std::uint8_t> strata;
};

/// Least-squares coefficient for inferring a from b.
inline double optimal_gamma(double cov_ab, double var_b) {
  if (!(var_b > 0.0)) throw std::domain_error("optimal_gamma: var_b must be positive (degenerate marginal)");
  return cov_ab / var_b;
}

/// Closed-form minimum inference variances for modes (a, b) of a Gaussian state.
inline InferenceResult inference_variance_analytic(const GaussianState& state, std::size_t mode_a,
                                                   std::size_t mode_b) {
  if (mode_a == mode_b) throw std::invalid_argument("inference_variance_analytic: modes must differ");
  if (mode_a >= state.n_modes() || mode_b >= state.n_modes()) {
    throw std::out_of_range("inference_variance_analytic: mode out of range");
  }
  const auto& c = state.cov();
  auto branch = [&](Quadrature q, double& gamma, double& var_inf) {
    const auto ia = GaussianState::index(mode_a, q);
    const auto ib = GaussianState::index(mode_b, q);
    const double va = c(ia, ia);
    const double vb = c(ib, ib);
    const double cab = c(ia, ib);
    if (!(vb > 0.0) || !(va > 0.0)) throw std::domain_error("inference_variance_analytic: zero marginal variance");
    const double g = optimal_gamma(cab, vb);
    gamma = q == Quadrature::X ? g : -g;
    var_inf = std::max(0.0, (va * vb - cab * cab) / vb);
  };
  InferenceResult r;
  branch(Quadrature::X, r.gamma_x, r.var_x_inf);
  branch(Quadrature::P, r.gamma_p, r.var_p_inf);
  r.product = r.var_x_inf * r.var_p_inf;
  return r;
}

/// True when the product drops strictly below the quantum limit of 1.
inline bool epr_criterion(const InferenceResult& result) { return result.product < 1.0; }

namespace detail {

struct BranchEstimate {
  double coefficient;  // regression slope of a on b
  double var_inf;
  double stderr_var;
  std::size_t n;
};

inline BranchEstimate estimate_branch(const PairedSamples& s) {
  const std::size_t n = s.a_values.size();
  if (s.b_values.size() != n) throw std::invalid_argument("estimate_inference: a/b length mismatch");
  if (n < 2) throw std::invalid_argument("estimate_inference: need at least 2 pairs per basis");
  const bool stratified = !s.strata.empty();
  if (stratified && s.strata.size() != n) throw std::invalid_argument("estimate_inference: strata length mismatch");

  // Per-stratum means, then pooled centred sums.
  std::map<std::uint8_t, std::pair<double, double>> sums;
  std::map<std::uint8_t, std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t g = stratified ? s.strata[i] : 0;
    auto& acc = sums[g];
    acc.first += s.a_values[i];
    acc.second += s.b_values[i];
    ++counts[g];
  }
  const std::size_t groups = sums.size();
  if (n <= groups) throw std::invalid_argument("estimate_inference: too few pairs for the number of strata");
  std::map<std::uint8_t, std::pair<double, double>> means;
  for (const auto& [g, acc] : sums) {
    const double k = static_cast<double>(counts[g]);
    means[g] = {acc.first / k, acc.second / k};
  }
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = means[stratified ? s.strata[i] : 0];
    const double da = s.a_values[i] - m.first;
    const double db = s.b_values[i] - m.second;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  const double dof = static_cast<double>(n - groups);
  const double var_a = saa / dof;
  const double var_b = sbb / dof;
  const double cov_ab = sab / dof;
  if (!(var_b > 0.0)) throw std::domain_error("estimate_inference: zero sample variance of b-values");
  const double slope = optimal_gamma(cov_ab, var_b);
  const double var_inf = std::max(0.0, var_a - cov_ab * cov_ab / var_b);
  // Gaussian fourth moments: Var(s^2) = 2 sigma^4 / (n - 1).
  const double se = var_inf * std::sqrt(2.0 / dof);
  return {slope, var_inf, se, n};
}

}  // namespace detail

/// Plug-in estimate of the inference variances from paired fluctuations,
/// with a delta-method standard error for the product.
inline InferenceResult estimate_inference(const PairedSamples& samples_x, const PairedSamples& samples_p) {
  if (samples_x.basis != Quadrature::X || samples_p.basis != Quadrature::P) {
    throw std::invalid_argument("estimate_inference: expected (X, P) sample sets");
  }
  const auto bx = detail::estimate_branch(samples_x);
  const auto bp = detail::estimate_branch(samples_p);
  InferenceResult r;
  r.gamma_x = bx.coefficient;
  r.gamma_p = -bp.coefficient;
  r.var_x_inf = bx.var_inf;
  r.var_p_inf = bp.var_inf;
  r.product = r.var_x_inf * r.var_p_inf;
  r.stderr_var_x = bx.stderr_var;
  r.stderr_var_p = bp.stderr_var;
  r.stderr_product = std::hypot(r.var_p_inf * bx.stderr_var, r.var_x_inf * bp.stderr_var);
  r.n_pairs_x = bx.n;
  r.n_pairs_p = bp.n;
  return r;
}

}  // namespace eprqkd
