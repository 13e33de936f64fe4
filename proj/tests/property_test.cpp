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

// Randomized invariants. Each test draws from a fixed-seed engine so
// failures reproduce.

#include <gtest/gtest.h>

#include <random>

#include "eprqkd/adversary.hpp"
#include "eprqkd/bell.hpp"
#include "eprqkd/epr_metrics.hpp"
#include "eprqkd/harness/config.hpp"
#include "oracles/linear_modes.hpp"

using namespace eprqkd;

namespace {

std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

double uni(std::mt19937_64& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }

Eigen::MatrixXcd random_coefficients(std::mt19937_64& g, Eigen::Index dim, double decay) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd c(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) c(i, j) = Complex(n(g), n(g)) * std::exp(-decay * double(i + j));
  }
  return c;
}

}  // namespace

TEST(Property, RandomGaussianCircuitsStayPhysical) {
  auto g = engine(1);
  for (int trial = 0; trial < 300; ++trial) {
    GaussianState s = vacuum_state(3);
    for (int step = 0; step < 6; ++step) {
      const auto m1 = static_cast<std::size_t>(g() % 3);
      const auto m2 = (m1 + 1 + g() % 2) % 3;
      switch (g() % 4) {
        case 0: {
          const auto op = two_mode_squeeze_op(3, m1, m2, uni(g, -1.5, 1.5));
          ASSERT_TRUE(op.is_symplectic(1e-9));
          s = op.apply(s);
          break;
        }
        case 1: {
          const auto op = beamsplitter_op(3, m1, m2, uni(g, 0.0, 1.0));
          ASSERT_TRUE(op.is_symplectic(1e-12));
          s = op.apply(s);
          break;
        }
        case 2: s = phase_shift(s, m1, uni(g, -3.2, 3.2)); break;
        default: s = apply_loss(s, m1, uni(g, 0.0, 1.0)); break;
      }
    }
    ASSERT_TRUE(s.is_physical(1e-8)) << trial;
    // Inference never beats either party's own variance.
    const auto r = inference_variance_analytic(s, 0, 1);
    ASSERT_LE(r.var_x_inf, s.cov()(0, 0) + 1e-12);
    ASSERT_LE(r.var_p_inf, s.cov()(1, 1) + 1e-12);
    ASSERT_GE(r.var_x_inf, -1e-12);
  }
}

TEST(Property, LossNeverImprovesEprProduct) {
  auto g = engine(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double kt = uni(g, 0.05, 1.5);
    const double e1 = uni(g, 0.0, 1.0), e2 = uni(g, 0.0, 1.0);
    const GaussianState src = two_mode_squeeze(vacuum_state(2), 0, 1, kt);
    const double p1 = inference_variance_analytic(apply_loss(src, 0, std::min(e1, e2)), 0, 1).product;
    const double p2 = inference_variance_analytic(apply_loss(src, 0, std::max(e1, e2)), 0, 1).product;
    ASSERT_GE(p1, p2 - 1e-12);
    ASSERT_LE(p1, 1.0 + 1e-12);
  }
}

TEST(Property, TapSignatureMatchesLinearOracle) {
  auto g = engine(3);
  for (int trial = 0; trial < 200; ++trial) {
    ProtocolConfig c;
    c.kappa_t = uni(g, 0.05, 1.2);
    const double eta = uni(g, 0.0, 1.0);
    const double r_sq = uni(g, 1.0, 20.0);
    const auto sig = predicted_signature(eve::QndTap{eta, r_sq}, c);
    // Bob's mode: sqrt(eta) signal + sqrt(1-eta) squeezed ancilla (X variance 1/r_sq).
    auto amp = oracle::amplifier(c.kappa_t, 2);
    const auto anc_x = oracle::Linear::source(4, 6) * (1.0 / std::sqrt(r_sq));
    const auto anc_p = oracle::Linear::source(5, 6) * std::sqrt(r_sq);
    const auto bx = amp.xa * std::sqrt(eta) + anc_x * std::sqrt(1.0 - eta);
    const auto bp = amp.pa * std::sqrt(eta) + anc_p * std::sqrt(1.0 - eta);
    ASSERT_NEAR(sig.var_x_inf_new, oracle::min_inference_variance(bx, amp.xb), 1e-9);
    ASSERT_NEAR(sig.var_p_inf_new, oracle::min_inference_variance(bp, amp.pb), 1e-9);
  }
}

TEST(Property, FactorizedModelsRespectChBound) {
  auto g = engine(4);
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 1 + static_cast<int>(g() % 6);
    std::vector<LhvComponent> model(k);
    double total = 0.0;
    for (auto& c : model) {
      c.weight = uni(g, 0.0, 1.0);
      total += c.weight;
      // Mix interior values with the deterministic corners.
      for (double* p : {&c.p_a[0], &c.p_a[1], &c.p_b[0], &c.p_b[1]}) {
        *p = g() % 3 ? uni(g, 0.0, 1.0) : double(g() % 2);
      }
    }
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += (model[i].weight /= total);
    model.back().weight = 1.0 - s;
    double den = 0.0;
    for (const auto& c : model) den += c.weight * (c.p_a[1] + c.p_b[0]);
    if (den <= 0.0) continue;
    ASSERT_LE(lhv_factorized_S(model), 1.0 + 1e-12) << trial;
  }
}

TEST(Property, RandomStatesGiveValidProbabilities) {
  auto g = engine(5);
  const std::size_t n = 12;
  const HalfAxisTable table(n);
  for (int trial = 0; trial < 100; ++trial) {
    FockTwoMode s = FockTwoMode::pure(random_coefficients(g, n + 1, uni(g, 0.05, 0.6)));
    if (trial % 4 == 0) s = apply_fock_loss(s, uni(g, 0.0, 1.0), uni(g, 0.0, 1.0));
    ASSERT_NEAR(s.trace(), 1.0, 1e-10);
    const double th = uni(g, -4, 4), ph = uni(g, -4, 4);
    const auto p = sign_probabilities(s, table, th, ph);
    ASSERT_LE(p.p_joint, std::min(p.p_plus_a, p.p_plus_b) + 1e-9);
    ASSERT_GE(p.p_joint, p.p_plus_a + p.p_plus_b - 1.0 - 1e-9);
    const auto q = sign_probabilities(s, table, th + std::numbers::pi, ph);
    ASSERT_NEAR(p.p_joint + q.p_joint, p.p_plus_b, 1e-12);
  }
}

TEST(Property, BellSInvariantUnderGlobalPhase) {
  auto g = engine(6);
  const HalfAxisTable table(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd c = random_coefficients(g, 11, 0.3);
    AngleSet a{uni(g, -3, 3), uni(g, -3, 3), uni(g, -3, 3), uni(g, -3, 3)};
    const double s1 = bell_S(FockTwoMode::pure(c), table, a).S;
    const double s2 = bell_S(FockTwoMode::pure(c * std::polar(1.0, uni(g, 0, 6.28))), table, a).S;
    ASSERT_NEAR(s1, s2, 1e-13);
  }
}

TEST(Property, GridsAreMonotoneAndInclusive) {
  auto g = engine(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int steps = 1 + static_cast<int>(g() % 40);
    const double a = uni(g, -5, 5), step = uni(g, 0.01, 1.0) * (g() % 2 ? 1 : -1);
    const double b = a + steps * step;
    std::ostringstream spec;
    spec.precision(17);
    spec << a << ':' << b << ':' << step;
    const auto v = parse_grid(spec.str());
    ASSERT_EQ(v.size(), static_cast<std::size_t>(steps + 1)) << spec.str();
    for (std::size_t i = 1; i < v.size(); ++i) ASSERT_GT((v[i] - v[i - 1]) * step, 0.0);
  }
}
