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

#include "eprqkd/fock_state.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace eprqkd;

namespace {

Eigen::MatrixXcd vacuum(Eigen::Index dim) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  c(0, 0) = 1.0;
  return c;
}

}  // namespace

TEST(PairCoherent, NormalizationMatchesBessel) {
  // sum_n r0^{4n} / (n!)^2 = I0(2 r0^2); mpmath at r0 = 1.1.
  const auto s = pair_coherent_state(1.1, 40);
  const double c00 = s.coefficients()(0, 0).real();
  EXPECT_NEAR(1.0 / (c00 * c00), 3.0956399208749156, 1e-12);
  EXPECT_NEAR(s.mean_photons(0), 0.91476842564813274, 1e-12);
  EXPECT_NEAR(s.mean_photons(1), s.mean_photons(0), 1e-15);
  EXPECT_NEAR(s.trace(), 1.0, 1e-14);
  EXPECT_LT(s.tail_mass(), 1e-30);
}

TEST(PairCoherent, DiagonalOnly) {
  const auto s = pair_coherent_state(0.8, 12);
  const auto& c = s.coefficients();
  for (Eigen::Index n = 0; n < 13; ++n) {
    for (Eigen::Index m = 0; m < 13; ++m) {
      if (n != m) EXPECT_EQ(c(n, m), Complex(0.0));
    }
  }
}

TEST(PairCoherent, SmallAmplitudeApproachesVacuum) {
  const auto s = pair_coherent_state(1e-4, 5);
  EXPECT_NEAR(std::abs(s.coefficients()(0, 0)), 1.0, 1e-15);
}

TEST(PairCoherent, TruncationTooSmallThrows) {
  EXPECT_THROW(pair_coherent_state(1.1, 4), std::domain_error);
  EXPECT_THROW(pair_coherent_state(-1.0, 40), std::domain_error);
}

TEST(Squeezer, VacuumGivesTwoModeSqueezedVacuum) {
  const double s = 0.7;
  const Eigen::MatrixXcd c = apply_two_mode_squeezer(vacuum(61), s);
  EXPECT_NEAR(c(1, 1).real(), 0.48150310787300111, 1e-12);
  for (Eigen::Index n = 0; n < 20; ++n) {
    EXPECT_NEAR(c(n, n).real(), std::pow(std::tanh(s), static_cast<double>(n)) / std::cosh(s), 1e-12);
    EXPECT_NEAR(c(n, n).imag(), 0.0, 1e-15);
  }
  EXPECT_NEAR(c.diagonal().squaredNorm(), 1.0, 1e-12);
  const auto st = FockTwoMode::pure(c);
  EXPECT_NEAR(st.mean_photons(0), std::sinh(s) * std::sinh(s), 1e-10);
}

TEST(Squeezer, OrthogonalAndInvertible) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Random(15, 15);
  const Eigen::MatrixXcd u = apply_two_mode_squeezer(c, 0.9);
  EXPECT_NEAR(u.norm(), c.norm(), 1e-12);
  EXPECT_LT((apply_two_mode_squeezer(u, -0.9) - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cat, ZeroGainIsTheCatItself) {
  const double a = 0.9, b = 0.9;
  const auto s = evolved_cat_state(a, b, 0.0, 30);
  const auto& c = s.coefficients();
  const double norm = std::sqrt(2.0 + 2.0 * std::exp(-2.0 * (a * a + b * b)));
  EXPECT_NEAR(c(0, 0).real(), 2.0 * std::exp(-0.5 * (a * a + b * b)) / norm, 1e-14);
  EXPECT_NEAR(std::abs(c(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(c(1, 1).real(), 2.0 * std::exp(-0.5 * (a * a + b * b)) * a * b / norm, 1e-14);
}

TEST(Cat, EvolvedStateIsNormalizedWithSmallTail) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  EXPECT_NEAR(s.trace(), 1.0, 1e-13);
  EXPECT_LT(s.tail_mass(), kDefaultTailBound);
  EXPECT_THROW(evolved_cat_state(0.9, 0.9, 0.6, 10), std::domain_error);
  // Parity n_a + n_b stays even under the amplifier.
  const auto& c = s.coefficients();
  for (Eigen::Index n = 0; n < 31; ++n) {
    for (Eigen::Index m = 0; m < 31; ++m) {
      if ((n + m) % 2) EXPECT_LT(std::abs(c(n, m)), 1e-15);
    }
  }
}

TEST(PhaseEncoding, Involution) {
  const auto s = evolved_cat_state(0.9, 0.9, 0.6, 30);
  const auto once = phase_encode(s, true);
  const auto twice = phase_encode(once, true);
  EXPECT_LT((twice.coefficients() - s.coefficients()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((phase_rotate(s, std::numbers::pi).coefficients() - once.coefficients()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((once.photon_distribution(0) - s.photon_distribution(0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(phase_encode(s, false).coefficients(), s.coefficients());
}

TEST(Loss, KrausCompleteness) {
  for (double eta : {0.0, 0.3, 0.9216, 1.0}) {
    const auto ops = loss_kraus_operators(eta, 20);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(21, 21);
    for (const auto& a : ops) sum += a.transpose() * a;
    EXPECT_LT((sum - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff(), 1e-12) << eta;
  }
  EXPECT_THROW(loss_kraus_operators(1.5, 3), std::domain_error);
}

TEST(Loss, EndpointsAndPhotonScaling) {
  const auto s = pair_coherent_state(1.1, 40);
  const auto same = apply_fock_loss(s, 1.0);
  EXPECT_LT((same.density_matrix() - s.density_matrix()).cwiseAbs().maxCoeff(), 1e-14);
  const auto gone = apply_fock_loss(s, 0.0);
  EXPECT_NEAR(gone.photon_distribution(0)(0), 1.0, 1e-14);
  EXPECT_NEAR(gone.photon_distribution(1)(0), 1.0, 1e-14);
  const auto lossy = apply_fock_loss(s, 0.6, 0.3);
  EXPECT_FALSE(lossy.is_pure());
  EXPECT_NEAR(lossy.trace(), 1.0, 1e-13);
  EXPECT_NEAR(lossy.mean_photons(0), 0.6 * s.mean_photons(0), 1e-10);
  EXPECT_NEAR(lossy.mean_photons(1), 0.3 * s.mean_photons(1), 1e-10);
  EXPECT_THROW(lossy.coefficients(), std::logic_error);
}

TEST(Loss, SinglePhoton) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(4, 4);
  c(1, 0) = 1.0;
  const auto out = apply_fock_loss(FockTwoMode::pure(c), 0.3, 1.0);
  EXPECT_NEAR(out.photon_distribution(0)(1), 0.3, 1e-15);
  EXPECT_NEAR(out.photon_distribution(0)(0), 0.7, 1e-15);
  EXPECT_NEAR(amplitude_to_intensity(0.96), 0.9216, 1e-15);
}

TEST(Loss, DensityMatrixIsPositive) {
  const auto s = apply_fock_loss(evolved_cat_state(0.9, 0.9, 0.6, 12, 1.0), 0.8);
  const Eigen::MatrixXcd rho = s.density_matrix();
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho).eigenvalues().minCoeff(), -1e-14);
}
