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

#include "eprqkd/bell.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "oracles/wavefunction.hpp"

using namespace eprqkd;

namespace {

constexpr double kPi = std::numbers::pi;

FockTwoMode vacuum(Eigen::Index dim) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  c(0, 0) = 1.0;
  return FockTwoMode::pure(c);
}

}  // namespace

TEST(SignProbabilities, Vacuum) {
  const auto p = sign_probabilities(vacuum(6), 0.3, -1.1);
  EXPECT_NEAR(p.p_plus_a, 0.5, 1e-14);
  EXPECT_NEAR(p.p_plus_b, 0.5, 1e-14);
  EXPECT_NEAR(p.p_joint, 0.25, 1e-14);
}

TEST(SignProbabilities, PairCoherentMatchesWavefunctionOracle) {
  const auto s = pair_coherent_state(1.1, 40);
  const HalfAxisTable table(40);
  for (auto [th, ph] : {std::pair{0.0, -kPi / 4}, {kPi / 2, -3 * kPi / 4}, {0.3, 1.9}}) {
    const auto p = sign_probabilities(s, table, th, ph);
    EXPECT_NEAR(p.p_joint, oracle::joint_plus_plus(s.coefficients(), th, ph), 1e-9) << th << " " << ph;
    EXPECT_NEAR(p.p_plus_a, oracle::marginal_plus_a(s.coefficients(), th), 1e-9);
  }
}

TEST(SignProbabilities, CatMatchesWavefunctionOracle) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  const HalfAxisTable table(30);
  for (auto [th, ph] : {std::pair{0.42 * kPi, -0.28 * kPi}, {-0.28 * kPi, 0.42 * kPi}, {0.0, 0.0}, {1.0, -2.5}}) {
    const auto p = sign_probabilities(s, table, th, ph);
    EXPECT_NEAR(p.p_joint, oracle::joint_plus_plus(s.coefficients(), th, ph), 1e-9) << th << " " << ph;
    EXPECT_NEAR(p.p_plus_a, oracle::marginal_plus_a(s.coefficients(), th), 1e-9);
  }
}

TEST(SignProbabilities, OutcomesPartitionUnity) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  const HalfAxisTable table(30);
  const double th = 0.7, ph = -0.4;
  const auto pp = sign_probabilities(s, table, th, ph);
  const auto mp = sign_probabilities(s, table, th + kPi, ph);
  const auto pm = sign_probabilities(s, table, th, ph + kPi);
  const auto mm = sign_probabilities(s, table, th + kPi, ph + kPi);
  EXPECT_NEAR(pp.p_joint + mp.p_joint + pm.p_joint + mm.p_joint, 1.0, 1e-12);
  EXPECT_NEAR(pp.p_joint + mp.p_joint, pp.p_plus_b, 1e-12);
  EXPECT_NEAR(pp.p_joint + pm.p_joint, pp.p_plus_a, 1e-12);
}

TEST(SignProbabilities, GlobalPhaseAndRotationCovariance) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  const HalfAxisTable table(30);
  const auto g = FockTwoMode::pure(s.coefficients() * std::polar(1.0, 1.3));
  const double d = kPi / 3;
  const auto r = phase_rotate(s, d);
  for (double th : {0.0, 0.8, -2.0}) {
    const auto base = sign_probabilities(s, table, th, 0.5);
    EXPECT_NEAR(sign_probabilities(g, table, th, 0.5).p_joint, base.p_joint, 1e-14);
    const auto rot = sign_probabilities(r, table, th + d, 0.5);
    EXPECT_NEAR(rot.p_joint, base.p_joint, 1e-13);
    EXPECT_NEAR(rot.p_plus_a, base.p_plus_a, 1e-13);
  }
}

TEST(BellS, FrozenValues) {
  const auto pc = bell_S(pair_coherent_state(1.1, 40), pair_coherent_angles());
  EXPECT_NEAR(pc.S, 1.0159787327, 1e-9);
  const auto cat = bell_S(evolved_cat_state(0.9, 0.9, 0.6, 30), cat_state_angles());
  EXPECT_NEAR(cat.S, 1.0082757118, 1e-9);
  EXPECT_NEAR(cat.S, ch_ratio(cat.p_joint, cat.p_plus_a_theta_prime, cat.p_plus_b_phi), 1e-15);
}

TEST(BellS, ShiftedStateWithShiftedAnglesIsEquivalent) {
  BellSpec spec = default_bell_spec(BellStateKind::Cat);
  const double plain = bell_S(build_bell_state(spec, 30), spec.angles).S;
  spec.shifted = true;
  AngleSet a = spec.angles;
  a.theta += kPi;
  a.theta_prime += kPi;
  EXPECT_NEAR(bell_S(build_bell_state(spec, 30), a).S, plain, 1e-13);
}

TEST(BellS, VacuumAndErrors) {
  EXPECT_NEAR(bell_S(vacuum(5), pair_coherent_angles()).S, 0.5, 1e-14);
  EXPECT_THROW(bell_S(vacuum(5), HalfAxisTable(6), pair_coherent_angles()), std::invalid_argument);
  EXPECT_THROW(ch_ratio({0, 0, 0, 0}, 0.0, 0.0), std::domain_error);
}

TEST(BellS, EvaluateReportsConvergence) {
  const auto r = evaluate_bell(default_bell_spec(BellStateKind::PairCoherent));
  EXPECT_LT(r.convergence_delta, 1e-4);
  EXPECT_NEAR(r.S_refined, r.outcome.S, 1e-4);
}

TEST(Lhv, DeterministicStrategiesReachOne) {
  double best = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    LhvComponent c;
    c.p_a = {double(mask & 1), double((mask >> 1) & 1)};
    c.p_b = {double((mask >> 2) & 1), double((mask >> 3) & 1)};
    if (c.p_a[1] + c.p_b[0] == 0.0) continue;
    const double s = lhv_factorized_S({c});
    EXPECT_LE(s, 1.0 + 1e-15);
    best = std::max(best, s);
  }
  EXPECT_DOUBLE_EQ(best, 1.0);
  EXPECT_THROW(lhv_factorized_S({{0.5, {1, 1}, {1, 1}}}), std::domain_error);
  EXPECT_THROW(lhv_factorized_S({{1.0, {1.2, 1}, {1, 1}}}), std::domain_error);
  EXPECT_THROW(lhv_factorized_S({}), std::invalid_argument);
}

TEST(Lhv, InterceptResendSurrogateStaysLocal) {
  const auto s = pair_coherent_state(1.1, 40);
  const auto angles = pair_coherent_angles();
  for (double th0 : {0.0, -kPi / 4}) {
    const auto model = intercept_resend_surrogate(s, angles, th0, Complex(1.1, 0.0), default_bin_edges(40));
    EXPECT_LE(lhv_factorized_S(model), 1.0 + 1e-12);
  }
}

TEST(BlockDecode, RecoversPhaseEncodedBit) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  const auto edges = default_bin_edges(30);
  const std::size_t bins = edges.size() - 1;
  const auto ref0 = reference_histogram(s, 0.0, 0.0, edges);
  const auto ref1 = reference_histogram(phase_encode(s, true), 0.0, 0.0, edges);
  double total = 0.0;
  for (double p : ref0) total += p;
  EXPECT_NEAR(total, 1.0, 1e-10);

  const auto counts = sample_histogram(ref0, 2000, 11);
  const auto d = block_decode(counts, ref0, ref1);
  EXPECT_EQ(d.bit, 0);
  EXPECT_GT(d.llr, 0.0);
  EXPECT_EQ(block_decode(counts, ref1, ref0).bit, 1);
  EXPECT_EQ(block_decode(sample_histogram(ref1, 2000, 12), ref0, ref1).bit, 1);

  // Bob's marginal alone carries nothing about Alice's phase.
  const auto m0 = marginal_b(ref0, bins), m1 = marginal_b(ref1, bins);
  const auto mc = sample_histogram(m0, 2000, 13);
  EXPECT_NEAR(block_decode(mc, m0, m1).llr, 0.0, 1e-6);

  EXPECT_THROW(block_decode(std::vector<std::uint64_t>(ref0.size(), 0), ref0, ref1), std::invalid_argument);
  EXPECT_THROW(block_decode(counts, m0, m1), std::invalid_argument);
}
