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

// Fock-basis matrix of the projector onto X_theta >= 0, where
// X_theta = X cos(theta) + P sin(theta) and X = a + a^dagger. The
// position-space number states in this scaling are
//   psi_n(x) = (2 pi)^{-1/4} (2^n n!)^{-1/2} H_n(x / sqrt 2) exp(-x^2 / 4).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace eprqkd {

/// psi_0(x) .. psi_n_max(x) by the stable three-term recurrence
///   psi_{n+1} = x psi_n / sqrt(n+1) - sqrt(n/(n+1)) psi_{n-1}.
inline void number_state_wavefunctions(double x, std::size_t n_max, std::vector<double>& out) {
  out.resize(n_max + 1);
  out[0] = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-0.25 * x * x);
  if (n_max >= 1) out[1] = x * out[0];
  for (std::size_t n = 1; n < n_max; ++n) {
    const double nn = static_cast<double>(n);
    out[n + 1] = (x * out[n] - std::sqrt(nn) * out[n - 1]) / std::sqrt(nn + 1.0);
  }
}

namespace detail {

// Matrix-valued Gauss-Legendre estimate of int_a^b psi psi^T dx.
inline Eigen::MatrixXd gauss_overlap_block(double a, double b, std::size_t n_max) {
  using rule = boost::math::quadrature::gauss<double, 40>;
  const auto& nodes = rule::abscissa();
  const auto& weights = rule::weights();
  const auto dim = static_cast<Eigen::Index>(n_max + 1);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> psi;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto add = [&](double x, double w) {
    number_state_wavefunctions(x, n_max, psi);
    const Eigen::Map<const Eigen::VectorXd> v(psi.data(), dim);
    acc.noalias() += (w * half) * v * v.transpose();
  };
  // Boost stores the non-negative half of the symmetric rule.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == 0.0) {
      add(mid, weights[i]);
    } else {
      add(mid + half * nodes[i], weights[i]);
      add(mid - half * nodes[i], weights[i]);
    }
  }
  return acc;
}

inline void adaptive_overlap(double a, double b, std::size_t n_max, const Eigen::MatrixXd& whole, double tol,
                             int depth, Eigen::MatrixXd& sum) {
  const double mid = 0.5 * (a + b);
  Eigen::MatrixXd left = gauss_overlap_block(a, mid, n_max);
  Eigen::MatrixXd right = gauss_overlap_block(mid, b, n_max);
  const double err = (left + right - whole).cwiseAbs().maxCoeff();
  if (err <= tol) {
    sum += left + right;
    return;
  }
  if (depth >= 30) throw std::runtime_error("halfaxis_overlaps_quadrature: integration did not converge");
  adaptive_overlap(a, mid, n_max, left, tol, depth + 1, sum);
  adaptive_overlap(mid, b, n_max, right, tol, depth + 1, sum);
}

}  // namespace detail

/// Integration cutoff beyond which every psi_n, n <= truncation, is negligible.
inline double halfaxis_cutoff(std::size_t truncation) {
  return std::sqrt(2.0 * (2.0 * static_cast<double>(truncation) + 1.0)) + 10.0;
}

/// Overlaps J[n][m] = int_0^inf psi_n psi_m dx by adaptive Gauss-Legendre
/// (interval bisection until halves agree with the whole) on [0, x_max],
/// x_max = sqrt(2(2N+1)) + 10. Beyond x_max every psi_n is bounded by a
/// Gaussian tail far below double precision.
inline Eigen::MatrixXd halfaxis_overlaps_quadrature(std::size_t truncation) {
  const double x_max = halfaxis_cutoff(truncation);
  const auto dim = static_cast<Eigen::Index>(truncation + 1);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  // Seed with pieces about one oscillation wide.
  const int pieces = 4 + static_cast<int>(truncation / 2);
  for (int k = 0; k < pieces; ++k) {
    const double a = x_max * k / pieces;
    const double b = x_max * (k + 1) / pieces;
    detail::adaptive_overlap(a, b, truncation, detail::gauss_overlap_block(a, b, truncation), 1e-13, 0, sum);
  }
  if (!sum.allFinite()) throw std::runtime_error("halfaxis_overlaps_quadrature: non-finite result");
  return 0.5 * (sum + sum.transpose());
}

/// int_a^b psi_n psi_m dx for a finite interval, same adaptive rule.
inline Eigen::MatrixXd interval_overlaps(double a, double b, std::size_t truncation) {
  if (!(b > a)) throw std::invalid_argument("interval_overlaps: need a < b");
  const auto dim = static_cast<Eigen::Index>(truncation + 1);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) * (1.0 + 0.25 * static_cast<double>(truncation)))));
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + (b - a) * k / pieces;
    const double hi = a + (b - a) * (k + 1) / pieces;
    detail::adaptive_overlap(lo, hi, truncation, detail::gauss_overlap_block(lo, hi, truncation), 1e-13, 0, sum);
  }
  return 0.5 * (sum + sum.transpose());
}

/// Same overlaps in closed form. Same-parity pairs follow from parity
/// (1/2 on the diagonal, 0 otherwise); for n + m odd the Wronskian identity
/// gives J = -W(0) / (n - m) with W = psi_n psi_m' - psi_n' psi_m.
inline Eigen::MatrixXd halfaxis_overlaps_closed_form(std::size_t truncation) {
  const std::size_t dim = truncation + 1;
  // Values and derivatives at the origin in the x scaling above.
  std::vector<double> v(dim + 1, 0.0);
  v[0] = std::pow(2.0 * std::numbers::pi, -0.25);
  for (std::size_t n = 2; n <= dim; n += 2) {
    v[n] = -std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n)) * v[n - 2];
  }
  // psi_n' = (sqrt(n) psi_{n-1} - sqrt(n+1) psi_{n+1}) / 2
  std::vector<double> d(dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    const double nn = static_cast<double>(n);
    d[n] = 0.5 * ((n ? std::sqrt(nn) * v[n - 1] : 0.0) - std::sqrt(nn + 1.0) * v[n + 1]);
  }
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < dim; ++n) {
    for (std::size_t m = 0; m < dim; ++m) {
      double val;
      if (n == m) {
        val = 0.5;
      } else if ((n + m) % 2 == 0) {
        val = 0.0;
      } else {
        const double w0 = v[n] * d[m] - d[n] * v[m];
        val = -w0 / (static_cast<double>(n) - static_cast<double>(m));
      }
      j(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = val;
    }
  }
  return j;
}

/// Immutable table of half-axis overlaps for one truncation; projectors for
/// any angle are phase-dressed copies of it.
class HalfAxisTable {
 public:
  explicit HalfAxisTable(std::size_t truncation)
      : truncation_(truncation), overlaps_(halfaxis_overlaps_quadrature(truncation)) {}

  std::size_t truncation() const { return truncation_; }
  const Eigen::MatrixXd& overlaps() const { return overlaps_; }

  /// D(theta)[n][m] = e^{i (n - m) theta} J[n][m]: the projector onto X_theta >= 0.
  Eigen::MatrixXcd projector(double theta) const {
    const auto dim = overlaps_.rows();
    Eigen::MatrixXcd d(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
      for (Eigen::Index m = 0; m < dim; ++m) {
        const double phase = static_cast<double>(n - m) * theta;
        d(n, m) = overlaps_(n, m) * std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
    return d;
  }

 private:
  std::size_t truncation_;
  Eigen::MatrixXd overlaps_;
};

inline Eigen::MatrixXcd halfaxis_projector(double theta, std::size_t truncation) {
  return HalfAxisTable(truncation).projector(theta);
}

}  // namespace eprqkd
