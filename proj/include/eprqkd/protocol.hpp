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

// End-to-end protocol. Alice encodes each bit in the coherent amplitude fed
// to the amplifier, keeps the idler beam, and sends the signal beam to Bob
// through the (possibly tapped) lossy channel. Bob measures X or P at
// random, decodes the bit from the nearest mean and publishes only the basis
// and his fluctuation about that mean. Alice measures the same basis on her
// beam, records her own fluctuation, and both estimate the EPR product. An
// increase over the calibrated Eve-free level, or an excess of rounds far
// from Alice's conditional prediction, raises the alarm.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "eprqkd/adversary.hpp"
#include "eprqkd/epr_metrics.hpp"
#include "eprqkd/gaussian_state.hpp"
#include "eprqkd/protocol_config.hpp"
#include "eprqkd/rng.hpp"

namespace eprqkd {

enum class Role { Alice, Bob };

struct BitRound {
  std::uint64_t round = 0;
  int bit_sent = 0;
  Quadrature bob_basis = Quadrature::X;
  Quadrature alice_basis = Quadrature::X;
  double bob_raw = 0.0;
  double bob_fluct = 0.0;
  double alice_raw = 0.0;
  double alice_fluct = 0.0;
  int bob_bit_decoded = 0;
};

/// What Bob and Alice exchange over the public channel. Bit values are not part of it.
struct PublicRecord {
  std::uint64_t round;
  Quadrature basis;
  double bob_fluct;
  double alice_fluct;
};

struct DetectionReport {
  double product_est = 0.0;
  double product_stderr = 0.0;
  double baseline_product = 0.0;
  bool alarm = false;
  double outlier_fraction = 0.0;
  double ber = 0.0;
};

struct Baseline {
  InferenceResult inference;
  std::uint64_t n_calibration = 0;
  double product() const { return inference.product; }
};

struct OutlierResult {
  std::vector<double> z;
  std::vector<std::uint8_t> flagged;
  double fraction = 0.0;
  double expected_fraction = 0.0;  // 2 Q(outlier_z)
  double threshold = 0.0;          // alarm level for `fraction`
};

struct ProtocolRun {
  std::vector<BitRound> rounds;
  DetectionReport report;
  InferenceResult inference;
  Baseline baseline;
  OutlierResult outliers;
  bool product_alarm = false;
  bool outlier_alarm = false;
  double eve_ber = 0.5;         // Eve's decode error rate; 0.5 when Eve decodes nothing
  double resolution_ratio = 0;  // Bob's mean separation over his noise sigma, no Eve
  std::vector<std::string> warnings;
};

/// Mean Bob expects for either quadrature, including the channel's sqrt(eta).
inline double bob_expected_mean(const ProtocolConfig& c, int bit) {
  return std::sqrt(c.channel_eta) * signal_mean(c, bit);
}

/// Bob's noise sigma for a known channel and no eavesdropper.
inline double bob_sigma(const ProtocolConfig& c) {
  return std::sqrt(c.channel_eta * std::cosh(2.0 * c.kappa_t) + 1.0 - c.channel_eta);
}

inline double resolution_ratio(const ProtocolConfig& c) {
  return std::abs(bob_expected_mean(c, 1) - bob_expected_mean(c, 0)) / bob_sigma(c);
}

/// State reaching the detectors for one bit: coherent input on the signal,
/// vacuum idler, amplifier, Gaussian attack, then channel loss on the signal.
inline GaussianState encode_round(int bit, const ProtocolConfig& c) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("encode_round: bit must be 0 or 1");
  GaussianState s = apply_gaussian_attack(source_state(c, bit), c.eve);
  return apply_loss(s, kSignalMode, c.channel_eta);
}

/// Nearest-mean rule between Bob's two attenuated means; the midpoint decodes to 0.
inline int bob_decode(double raw, Quadrature /*basis*/, const ProtocolConfig& c) {
  return nearest_mean_bit(raw, bob_expected_mean(c, 0), bob_expected_mean(c, 1));
}

/// Raw result minus the mean implied by (bit, basis, role). Bob's means are
/// attenuated by the channel; Alice's beam is not.
inline double record_fluctuation(double raw, int bit, Quadrature basis, Role role, const ProtocolConfig& c) {
  return role == Role::Bob ? raw - bob_expected_mean(c, bit) : raw - idler_mean(c, bit, basis);
}

inline std::vector<PublicRecord> public_transcript(std::span<const BitRound> rounds) {
  std::vector<PublicRecord> out;
  out.reserve(rounds.size());
  for (const auto& r : rounds) out.push_back({r.round, r.bob_basis, r.bob_fluct, r.alice_fluct});
  return out;
}

namespace detail {

struct RoundSimulator {
  const ProtocolConfig& config;
  const eve::InterceptResend* resend = nullptr;
  // [bit][basis] joint samplers over (signal, idler[, eve]) quadratures.
  std::optional<QuadratureSampler> samplers[2][2];
  bool eve_has_mode = false;
  double eve_means[2] = {0.0, 0.0};

  explicit RoundSimulator(const ProtocolConfig& c) : config(c) {
    resend = std::get_if<eve::InterceptResend>(&c.eve);
    Quadrature eve_q = Quadrature::X;
    std::visit([&](const auto& m) {
      if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, eve::None>) eve_q = m.measures;
    }, c.eve);
    eve_has_mode = std::holds_alternative<eve::BeamsplitterTap>(c.eve) || std::holds_alternative<eve::QndTap>(c.eve);

    for (int bit = 0; bit < 2; ++bit) {
      const GaussianState state = resend ? source_state(c, bit) : encode_round(bit, c);
      for (int b = 0; b < 2; ++b) {
        const Quadrature basis = b ? Quadrature::P : Quadrature::X;
        std::vector<QuadratureSampler::Selection> sel;
        // With intercept-resend the signal slot holds the quadrature Eve measures.
        sel.push_back({kSignalMode, resend ? eve_q : basis});
        sel.push_back({kIdlerMode, basis});
        if (eve_has_mode) sel.push_back({kEveMode, eve_q});
        samplers[bit][b].emplace(state, sel);
        if (eve_has_mode) eve_means[bit] = samplers[bit][b]->mean()(2);
      }
    }
  }

  /// Fills one round and returns Eve's decoded bit (-1 if Eve decodes nothing).
  int simulate(RandomStream& rng, int bit, Quadrature basis, BitRound& out) const {
    double v[3] = {0.0, 0.0, 0.0};
    const auto& sampler = *samplers[bit][basis == Quadrature::P ? 1 : 0];
    sampler.draw(rng, std::span<double>(v, sampler.size()));
    out.bit_sent = bit;
    out.bob_basis = basis;
    out.alice_basis = basis;
    out.alice_raw = v[1];
    int eve_bit = -1;
    if (resend) {
      const auto outcome = intercept_resend_transform(v[0], *resend, config, rng);
      const int qi = basis == Quadrature::X ? 0 : 1;
      const double eta = config.channel_eta;
      const double mean = std::sqrt(eta) * outcome.resent_mean[qi];
      const double var = eta * outcome.resent_var[qi] + 1.0 - eta;
      out.bob_raw = mean + std::sqrt(var) * rng.normal();
      eve_bit = outcome.eve_bit;
    } else {
      out.bob_raw = v[0];
      if (eve_has_mode) eve_bit = nearest_mean_bit(v[2], eve_means[0], eve_means[1]);
    }
    out.bob_bit_decoded = bob_decode(out.bob_raw, basis, config);
    out.bob_fluct = record_fluctuation(out.bob_raw, out.bob_bit_decoded, basis, Role::Bob, config);
    out.alice_fluct = record_fluctuation(out.alice_raw, bit, basis, Role::Alice, config);
    return eve_bit;
  }
};

struct SimulatedRounds {
  std::vector<BitRound> rounds;
  std::vector<int> eve_bits;
};

inline SimulatedRounds simulate_rounds(const ProtocolConfig& c, std::uint64_t n_rounds, StreamTag tag) {
  const RoundSimulator sim(c);
  SimulatedRounds out;
  out.rounds.resize(n_rounds);
  out.eve_bits.assign(n_rounds, -1);
  const std::uint64_t n_blocks = (n_rounds + kRoundsPerStream - 1) / kRoundsPerStream;

  auto run_block = [&](std::uint64_t block) {
    RandomStream rng(c.seed, block, tag);
    const std::uint64_t end = std::min<std::uint64_t>(n_rounds, (block + 1) * kRoundsPerStream);
    for (std::uint64_t i = block * kRoundsPerStream; i < end; ++i) {
      const int coin = rng.coin();
      const int bit = c.message.empty() ? coin : c.message[i % c.message.size()];
      const Quadrature basis = rng.coin() ? Quadrature::P : Quadrature::X;
      BitRound& r = out.rounds[i];
      r.round = i;
      out.eve_bits[i] = sim.simulate(rng, bit, basis, r);
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, c.workers), n_blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < n_blocks; b += workers) run_block(b);
      });
    }
  }
  return out;
}

inline InferenceResult estimate_from_rounds(std::span<const BitRound> rounds) {
  PairedSamples sx{Quadrature::X, {}, {}, {}};
  PairedSamples sp{Quadrature::P, {}, {}, {}};
  for (const auto& r : rounds) {
    auto& s = r.bob_basis == Quadrature::X ? sx : sp;
    s.a_values.push_back(r.bob_fluct);
    s.b_values.push_back(r.alice_fluct);
    s.strata.push_back(static_cast<std::uint8_t>(r.bit_sent));
  }
  return estimate_inference(sx, sp);
}

}  // namespace detail

/// EPR level of the Eve-free line at the configured loss, measured with
/// n_calibration rounds on a stream independent of the protocol run.
inline Baseline calibrate_baseline(const ProtocolConfig& config, std::uint64_t n_calibration) {
  if (n_calibration < 1000) throw std::invalid_argument("calibrate_baseline: n_calibration must be >= 1000");
  ProtocolConfig c = config;
  c.eve = eve::None{};
  c.message.clear();
  const auto sim = detail::simulate_rounds(c, n_calibration, StreamTag::kCalibration);
  return {detail::estimate_from_rounds(sim.rounds), n_calibration};
}

/// Per-round z-scores of Bob's fluctuation about the value Alice predicts for
/// it from her own, using the calibrated regression and inference variance.
inline OutlierResult conditional_outlier_test(std::span<const double> alice_fluct, std::span<const double> bob_fluct,
                                              std::span<const Quadrature> bases, const Baseline& baseline,
                                              double outlier_z, double outlier_margin = 4.0) {
  if (alice_fluct.size() != bob_fluct.size() || bases.size() != bob_fluct.size()) {
    throw std::invalid_argument("conditional_outlier_test: length mismatch");
  }
  const auto& b = baseline.inference;
  if (!(b.var_x_inf > 0.0) || !(b.var_p_inf > 0.0)) {
    throw std::domain_error("conditional_outlier_test: baseline inference variances must be positive");
  }
  const double sd_x = std::sqrt(b.var_x_inf);
  const double sd_p = std::sqrt(b.var_p_inf);
  OutlierResult out;
  const std::size_t n = bob_fluct.size();
  out.z.resize(n);
  out.flagged.resize(n);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // delta_x = a - gamma_x b, delta_p = a + gamma_p b
    const double z = bases[i] == Quadrature::X ? (bob_fluct[i] - b.gamma_x * alice_fluct[i]) / sd_x
                                               : (bob_fluct[i] + b.gamma_p * alice_fluct[i]) / sd_p;
    out.z[i] = z;
    out.flagged[i] = std::abs(z) > outlier_z;
    count += out.flagged[i];
  }
  out.expected_fraction = 2.0 * gaussian_q(outlier_z);
  out.fraction = n ? static_cast<double>(count) / static_cast<double>(n) : 0.0;
  const double p0 = out.expected_fraction;
  out.threshold = p0 + outlier_margin * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(std::max<std::size_t>(n, 1)));
  return out;
}

/// Runs the whole protocol against the configured channel and adversary.
inline ProtocolRun run_protocol(const ProtocolConfig& config, const Baseline* precomputed_baseline = nullptr) {
  validate(config);
  ProtocolRun run;
  if (config.rounds < 100) run.warnings.push_back("fewer than 100 rounds: detection statistics are unreliable");
  run.resolution_ratio = resolution_ratio(config);
  if (run.resolution_ratio < 10.0) {
    run.warnings.push_back("bit resolution below 10 sigma: decode errors contaminate fluctuations");
  }

  auto sim = detail::simulate_rounds(config, config.rounds, StreamTag::kProtocol);
  run.rounds = std::move(sim.rounds);
  run.baseline = precomputed_baseline ? *precomputed_baseline : calibrate_baseline(config, config.n_calibration);
  run.inference = detail::estimate_from_rounds(run.rounds);

  std::vector<double> alice(run.rounds.size()), bob(run.rounds.size());
  std::vector<Quadrature> bases(run.rounds.size());
  std::size_t decode_errors = 0, eve_errors = 0, eve_decodes = 0;
  for (std::size_t i = 0; i < run.rounds.size(); ++i) {
    const auto& r = run.rounds[i];
    alice[i] = r.alice_fluct;
    bob[i] = r.bob_fluct;
    bases[i] = r.bob_basis;
    decode_errors += r.bob_bit_decoded != r.bit_sent;
    if (sim.eve_bits[i] >= 0) {
      ++eve_decodes;
      eve_errors += sim.eve_bits[i] != r.bit_sent;
    }
  }
  run.outliers = conditional_outlier_test(alice, bob, bases, run.baseline, config.outlier_z, config.outlier_margin);
  if (eve_decodes) run.eve_ber = static_cast<double>(eve_errors) / static_cast<double>(eve_decodes);

  auto& rep = run.report;
  rep.product_est = run.inference.product;
  rep.product_stderr = run.inference.stderr_product;
  rep.baseline_product = run.baseline.product();
  rep.outlier_fraction = run.outliers.fraction;
  rep.ber = static_cast<double>(decode_errors) / static_cast<double>(run.rounds.size());
  run.product_alarm = rep.product_est - rep.baseline_product > config.alarm_z * rep.product_stderr;
  run.outlier_alarm = run.outliers.fraction > run.outliers.threshold;
  rep.alarm = run.product_alarm || run.outlier_alarm;
  return run;
}

struct SeparationChoice {
  double separation = 0.0;  // alpha0 - alpha1
  double eve_ber = 0.5;     // Eve's BER with a vacuum tap at eta_min_detectable
  double bob_ber = 0.5;     // Bob's BER over the Eve-free channel
};

/// Largest amplitude separation alpha0 - alpha1 at which a vacuum tap at the
/// smallest detectable extra loss still leaves Eve a BER of at least
/// target_eve_ber, found by bisection. Fails when Bob could not decode at
/// that separation (BER above 0.5 - epsilon).
inline SeparationChoice choose_amplitude_separation(const ProtocolConfig& config, double eta_min_detectable,
                                                    double target_eve_ber, double epsilon = 0.01) {
  if (!(eta_min_detectable > 0.0 && eta_min_detectable < 1.0)) {
    throw FieldError("eta_min_detectable", "must lie in (0, 1)");
  }
  if (!(target_eve_ber > 0.0 && target_eve_ber <= 0.5)) throw FieldError("target_eve_ber", "must lie in (0, 0.5]");

  ProtocolConfig c = config;
  const EveModel tap = eve::BeamsplitterTap{eta_min_detectable, Quadrature::X};
  auto eve_ber_at = [&](double sep) {
    c.alpha0 = c.alpha1 + sep;
    return predicted_signature(tap, c).eve_ber;
  };
  auto bob_ber_at = [&](double sep) {
    const double bob_sep = std::sqrt(c.channel_eta) * std::numbers::sqrt2 * std::cosh(c.kappa_t) * sep;
    return gaussian_q(bob_sep / (2.0 * bob_sigma(c)));
  };

  SeparationChoice out;
  if (target_eve_ber >= 0.5) {
    out.separation = 0.0;
  } else {
    double hi = 1.0;
    while (eve_ber_at(hi) > target_eve_ber) {
      hi *= 2.0;
      if (hi > 1e12) throw std::domain_error("choose_amplitude_separation: no finite separation reaches target");
    }
    auto f = [&](double sep) { return eve_ber_at(sep) - target_eve_ber; };
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto [lo_b, hi_b] = boost::math::tools::bisect(f, 0.0, hi, tol);
    out.separation = 0.5 * (lo_b + hi_b);
  }
  out.eve_ber = out.separation > 0.0 ? eve_ber_at(out.separation) : 0.5;
  out.bob_ber = out.separation > 0.0 ? bob_ber_at(out.separation) : 0.5;
  if (out.separation > 0.0 && out.bob_ber > 0.5 - epsilon) {
    throw std::domain_error("choose_amplitude_separation: infeasible, Bob's BER would be " +
                            std::to_string(out.bob_ber));
  }
  return out;
}

}  // namespace eprqkd
