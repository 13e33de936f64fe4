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

// Eavesdropper models acting on the transmitted beam (mode 0). Alice's
// retained beam (mode 1) is never touched. Gaussian attacks (taps) are
// state transforms that append Eve's mode as mode 2; intercept-resend is
// measurement-conditioned and works on sampled values.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>

#include "eprqkd/epr_metrics.hpp"
#include "eprqkd/gaussian_state.hpp"
#include "eprqkd/protocol_config.hpp"
#include "eprqkd/rng.hpp"

namespace eprqkd {

inline constexpr std::size_t kSignalMode = 0;  // transmitted to Bob
inline constexpr std::size_t kIdlerMode = 1;   // retained by Alice
inline constexpr std::size_t kEveMode = 2;

/// Standard Gaussian upper tail.
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Mean of either signal quadrature leaving the amplifier: sqrt(2) alpha cosh(kt).
inline double signal_mean(const ProtocolConfig& c, int bit) {
  return std::numbers::sqrt2 * c.alpha(bit) * std::cosh(c.kappa_t);
}

/// Alice's idler means: +sqrt(2) alpha sinh(kt) for X, the negative for P.
inline double idler_mean(const ProtocolConfig& c, int bit, Quadrature q) {
  const double m = std::numbers::sqrt2 * c.alpha(bit) * std::sinh(c.kappa_t);
  return q == Quadrature::X ? m : -m;
}

/// Two-mode state after the amplifier for one bit, before any channel.
inline GaussianState source_state(const ProtocolConfig& c, int bit) {
  GaussianState s = vacuum_state(2);
  s = displace_coherent(s, kSignalMode, c.alpha(bit), std::numbers::pi / 4.0);
  return two_mode_squeeze(s, kSignalMode, kIdlerMode, c.kappa_t);
}

/// Appends Eve's mode (initially `ancilla`) and splits the signal on a
/// beamsplitter of transmittance eta_tap; Bob keeps mode 0.
inline GaussianState tap_with_ancilla(const GaussianState& state, double eta_tap, const GaussianState& ancilla) {
  if (ancilla.n_modes() != 1) throw std::invalid_argument("tap: ancilla must be single-mode");
  GaussianState joint = tensor_product(state, ancilla);
  return beamsplitter(joint, kSignalMode, joint.n_modes() - 1, eta_tap);
}

/// Beamsplitter tap with a vacuum ancilla.
inline GaussianState tap_transform(const GaussianState& state, double eta_tap) {
  return tap_with_ancilla(state, eta_tap, vacuum_state(1));
}

/// Tap whose ancilla is squeezed in the quadrature Eve reads out: variance
/// 1/r_sq there and r_sq in the conjugate quadrature.
inline GaussianState qnd_transform(const GaussianState& state, double eta_tap, double r_sq,
                                   Quadrature measures = Quadrature::X) {
  if (!(r_sq >= 1.0)) throw std::domain_error("qnd_transform: r_sq must be >= 1");
  GaussianState anc = squeezed_vacuum(r_sq);
  if (measures == Quadrature::P) anc = phase_shift(anc, 0, std::numbers::pi / 2.0);
  return tap_with_ancilla(state, eta_tap, anc);
}

/// Applies a Gaussian attack to a (signal, idler) state. Intercept-resend is
/// not a Gaussian channel and is rejected here.
inline GaussianState apply_gaussian_attack(const GaussianState& state, const EveModel& model) {
  return std::visit(
      [&](const auto& m) -> GaussianState {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, eve::None>) {
          return state;
        } else if constexpr (std::is_same_v<T, eve::BeamsplitterTap>) {
          return tap_transform(state, m.eta_tap);
        } else if constexpr (std::is_same_v<T, eve::QndTap>) {
          return qnd_transform(state, m.eta_tap, m.r_sq, m.measures);
        } else {
          throw std::logic_error(
              "intercept-resend is measurement-conditioned; simulate it with intercept_resend_transform");
        }
      },
      model);
}

/// Nearest-mean decision between the bit-0 and bit-1 means; ties go to 0.
inline int nearest_mean_bit(double value, double mean_bit0, double mean_bit1) {
  return std::abs(value - mean_bit1) < std::abs(value - mean_bit0) ? 1 : 0;
}

struct InterceptResendOutcome {
  double eve_record;
  int eve_bit;
  // Moments of the single-mode state Eve sends on to Bob (diagonal covariance).
  double resent_mean[2];  // (x, p)
  double resent_var[2];

  GaussianState resent_state() const {
    Eigen::VectorXd mean(2);
    mean << resent_mean[0], resent_mean[1];
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = resent_var[0];
    cov(1, 1) = resent_var[1];
    return GaussianState(std::move(mean), std::move(cov));
  }
};

/// Eve reads `true_value` (the signal quadrature she measures) with noise of
/// variance 1/r, decodes a bit, and prepares a minimum-uncertainty state:
/// measured quadrature centred on her record with variance 1/r, conjugate
/// quadrature centred on the mean of her decoded bit with variance r.
inline InterceptResendOutcome intercept_resend_transform(double true_value, const eve::InterceptResend& m,
                                                         const ProtocolConfig& c, RandomStream& rng) {
  if (!(m.r > 0.0)) throw std::domain_error("intercept_resend_transform: r must be positive");
  const double noise_var = 1.0 / m.r;
  const double record = true_value + std::sqrt(noise_var) * rng.normal();
  const int bit = nearest_mean_bit(record, signal_mean(c, 0), signal_mean(c, 1));
  InterceptResendOutcome out{record, bit, {0.0, 0.0}, {0.0, 0.0}};
  const int mi = m.measures == Quadrature::X ? 0 : 1;
  out.resent_mean[mi] = record;
  out.resent_mean[1 - mi] = signal_mean(c, bit);
  out.resent_var[mi] = noise_var;
  out.resent_var[1 - mi] = m.r;
  return out;
}

struct AttackSignature {
  double var_x_inf_new = 0.0;
  double var_p_inf_new = 0.0;
  double eve_separation = 0.0;
  double eve_sigma = 0.0;
  double eve_ber = 0.5;

  double product() const { return var_x_inf_new * var_p_inf_new; }
};

/// Inference variance of the attack-free source, 1/cosh(2 kt).
inline double source_inference_variance(double kappa_t) { return 1.0 / std::cosh(2.0 * kappa_t); }

/// Closed-form signatures Alice and Bob should see, including channel loss
/// applied after the attack.
inline AttackSignature predicted_signature(const EveModel& model, const ProtocolConfig& c) {
  validate(model);
  const double d = source_inference_variance(c.kappa_t);
  const double v_sig = std::cosh(2.0 * c.kappa_t);
  const double delta_alpha = c.alpha0 - c.alpha1;
  const double full_sep = std::numbers::sqrt2 * std::cosh(c.kappa_t) * delta_alpha;
  AttackSignature sig;

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, eve::None>) {
          sig.var_x_inf_new = d;
          sig.var_p_inf_new = d;
        } else if constexpr (std::is_same_v<T, eve::InterceptResend>) {
          const double measured = d + 1.0 / m.r;
          const double conjugate = d + m.r;
          sig.var_x_inf_new = m.measures == Quadrature::X ? measured : conjugate;
          sig.var_p_inf_new = m.measures == Quadrature::X ? conjugate : measured;
          sig.eve_separation = full_sep;
          sig.eve_sigma = std::sqrt(v_sig + 1.0 / m.r);
        } else {
          const double eta = m.eta_tap;
          double anc_measured = 1.0;
          double anc_conjugate = 1.0;
          if constexpr (std::is_same_v<T, eve::QndTap>) {
            anc_measured = 1.0 / m.r_sq;
            anc_conjugate = m.r_sq;
          }
          const double measured = eta * d + (1.0 - eta) * anc_measured;
          const double conjugate = eta * d + (1.0 - eta) * anc_conjugate;
          sig.var_x_inf_new = m.measures == Quadrature::X ? measured : conjugate;
          sig.var_p_inf_new = m.measures == Quadrature::X ? conjugate : measured;
          sig.eve_separation = std::sqrt(1.0 - eta) * full_sep;
          sig.eve_sigma = std::sqrt(eta * anc_measured + (1.0 - eta) * v_sig);
        }
      },
      model);

  const double eta_ch = c.channel_eta;
  sig.var_x_inf_new = eta_ch * sig.var_x_inf_new + (1.0 - eta_ch);
  sig.var_p_inf_new = eta_ch * sig.var_p_inf_new + (1.0 - eta_ch);
  if (sig.eve_sigma > 0.0) {
    sig.eve_ber = gaussian_q(sig.eve_separation / (2.0 * sig.eve_sigma));
  }
  return sig;
}

/// Fraction of Eve's nearest-mean decodes that miss the sent bit, by Monte Carlo.
inline double eve_ber_empirical(const EveModel& model, const ProtocolConfig& c, std::size_t n, std::uint64_t seed) {
  if (n < 1000) throw std::invalid_argument("eve_ber_empirical: n must be >= 1000");
  validate(model);
  std::size_t errors = 0;

  if (std::holds_alternative<eve::None>(model)) {
    for (std::size_t block = 0; block * kRoundsPerStream < n; ++block) {
      RandomStream rng(seed, block, StreamTag::kEveOnly);
      const std::size_t end = std::min(n, (block + 1) * kRoundsPerStream);
      for (std::size_t i = block * kRoundsPerStream; i < end; ++i) {
        const int bit = rng.coin();
        const int guess = rng.coin();
        errors += bit != guess;
      }
    }
    return static_cast<double>(errors) / static_cast<double>(n);
  }

  // Eve's measured quadrature and the means she decodes against.
  Quadrature q = Quadrature::X;
  std::visit([&](const auto& m) {
    if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, eve::None>) q = m.measures;
  }, model);

  const auto* ir = std::get_if<eve::InterceptResend>(&model);
  std::size_t eve_mode = ir ? kSignalMode : kEveMode;
  double means[2];
  std::optional<QuadratureSampler> samplers[2];
  for (int bit = 0; bit < 2; ++bit) {
    GaussianState s = source_state(c, bit);
    if (!ir) s = apply_gaussian_attack(s, model);
    const QuadratureSampler::Selection sel[] = {{eve_mode, q}};
    samplers[bit].emplace(s, sel);
    means[bit] = samplers[bit]->mean()(0);
  }
  for (std::size_t block = 0; block * kRoundsPerStream < n; ++block) {
    RandomStream rng(seed, block, StreamTag::kEveOnly);
    const std::size_t end = std::min(n, (block + 1) * kRoundsPerStream);
    for (std::size_t i = block * kRoundsPerStream; i < end; ++i) {
      const int bit = rng.coin();
      double v = 0.0;
      samplers[bit]->draw(rng, std::span<double>(&v, 1));
      int guess;
      if (ir) {
        guess = intercept_resend_transform(v, *ir, c, rng).eve_bit;
      } else {
        guess = nearest_mean_bit(v, means[0], means[1]);
      }
      errors += bit != guess;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

}  // namespace eprqkd
