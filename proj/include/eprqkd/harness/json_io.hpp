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

// JSON and CSV encodings of the library's result types. JSON numbers use
// the shortest representation that round-trips; CSV cells use %.17g.

#pragma once

#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eprqkd/bell.hpp"
#include "eprqkd/protocol.hpp"

namespace eprqkd {

using nlohmann::json;

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void to_json(json& j, const InferenceResult& r) {
  j = json{{"gamma_x", r.gamma_x},
           {"gamma_p", r.gamma_p},
           {"var_x_inf", r.var_x_inf},
           {"var_p_inf", r.var_p_inf},
           {"product", r.product},
           {"stderr_product", r.stderr_product},
           {"stderr_var_x", r.stderr_var_x},
           {"stderr_var_p", r.stderr_var_p},
           {"n_pairs_x", r.n_pairs_x},
           {"n_pairs_p", r.n_pairs_p}};
}

inline void to_json(json& j, const BitRound& r) {
  j = json{{"round", r.round},
           {"bit_sent", r.bit_sent},
           {"bob_basis", to_string(r.bob_basis)},
           {"alice_basis", to_string(r.alice_basis)},
           {"bob_raw", r.bob_raw},
           {"bob_fluct", r.bob_fluct},
           {"alice_raw", r.alice_raw},
           {"alice_fluct", r.alice_fluct},
           {"bob_bit_decoded", r.bob_bit_decoded}};
}

inline void to_json(json& j, const PublicRecord& r) {
  j = json{{"round", r.round}, {"basis", to_string(r.basis)}, {"bob_fluct", r.bob_fluct}, {"alice_fluct", r.alice_fluct}};
}

inline void to_json(json& j, const DetectionReport& r) {
  j = json{{"product_est", r.product_est},   {"product_stderr", r.product_stderr},
           {"baseline_product", r.baseline_product}, {"alarm", r.alarm},
           {"outlier_fraction", r.outlier_fraction}, {"ber", r.ber}};
}

inline void to_json(json& j, const AttackSignature& s) {
  j = json{{"var_x_inf_new", s.var_x_inf_new}, {"var_p_inf_new", s.var_p_inf_new}, {"product", s.product()},
           {"eve_separation", s.eve_separation}, {"eve_sigma", s.eve_sigma},     {"eve_ber", s.eve_ber}};
}

inline json eve_to_json(const EveModel& m) {
  json j{{"model", model_name(m)}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, eve::InterceptResend>) {
          j["r"] = v.r;
        } else if constexpr (std::is_same_v<T, eve::BeamsplitterTap>) {
          j["eta_tap"] = v.eta_tap;
        } else if constexpr (std::is_same_v<T, eve::QndTap>) {
          j["eta_tap"] = v.eta_tap;
          j["r_sq"] = v.r_sq;
        }
        if constexpr (!std::is_same_v<T, eve::None>) j["measures"] = to_string(v.measures);
      },
      m);
  return j;
}

/// Echo of everything that determines a protocol run's results. The worker
/// count is left out: results do not depend on it.
inline json protocol_to_json(const ProtocolConfig& c) {
  json j{{"alpha0", c.alpha0},
         {"alpha1", c.alpha1},
         {"kappa_t", c.kappa_t},
         {"channel_eta", c.channel_eta},
         {"rounds", c.rounds},
         {"seed", c.seed},
         {"alarm_z", c.alarm_z},
         {"outlier_z", c.outlier_z},
         {"outlier_margin", c.outlier_margin},
         {"n_calibration", c.n_calibration}};
  if (!c.message.empty()) {
    std::string bits;
    for (auto b : c.message) bits.push_back(b ? '1' : '0');
    j["message"] = bits;
  }
  return j;
}

/// Protocol run summary. Per-round data goes to the CSV and transcript files.
inline json run_to_json(const ProtocolRun& r) {
  return json{{"report", r.report},
              {"inference", r.inference},
              {"baseline", {{"n_calibration", r.baseline.n_calibration}, {"inference", r.baseline.inference}}},
              {"product_alarm", r.product_alarm},
              {"outlier_alarm", r.outlier_alarm},
              {"outlier_expected_fraction", r.outliers.expected_fraction},
              {"outlier_threshold", r.outliers.threshold},
              {"eve_ber", r.eve_ber},
              {"resolution_ratio", r.resolution_ratio},
              {"rounds", r.rounds.size()},
              {"warnings", r.warnings}};
}

inline void to_json(json& j, const AngleSet& a) {
  j = json{{"theta", a.theta}, {"theta_prime", a.theta_prime}, {"phi", a.phi}, {"phi_prime", a.phi_prime}};
}

inline void to_json(json& j, const BellOutcome& o) {
  j = json{{"p_plus_a_theta_prime", o.p_plus_a_theta_prime},
           {"p_plus_b_phi", o.p_plus_b_phi},
           {"p_joint",
            {{"theta_phi", o.p_joint[0]},
             {"theta_phi_prime", o.p_joint[1]},
             {"theta_prime_phi", o.p_joint[2]},
             {"theta_prime_phi_prime", o.p_joint[3]}}},
           {"S", o.S}};
}

inline json bell_spec_to_json(const BellSpec& s) {
  json j{{"state", to_string(s.kind)}, {"truncation", s.truncation}, {"loss_eta", s.loss_eta},
         {"shifted", s.shifted},       {"angles", s.angles},         {"tail_bound", s.tail_bound}};
  if (s.kind == BellStateKind::PairCoherent) {
    j["r0"] = s.r0;
  } else {
    j["alpha0"] = s.alpha0;
    j["beta0"] = s.beta0;
    j["kappa_t"] = s.kappa_t;
  }
  return j;
}

inline void to_json(json& j, const BellReport& r) {
  j = json{{"spec", bell_spec_to_json(r.spec)},
           {"outcome", r.outcome},
           {"S", r.outcome.S},
           {"violation", r.outcome.S > 1.0},
           {"tail_mass", r.tail_mass},
           {"S_refined", r.S_refined},
           {"refined_truncation", r.spec.truncation + 10},
           {"convergence_delta", r.convergence_delta}};
}

inline void write_transcript_json(std::ostream& os, std::span<const BitRound> rounds) {
  os << json(public_transcript(rounds)).dump(1) << '\n';
}

inline constexpr const char* kRoundCsvHeader = "round,bob_basis,bob_fluct,alice_fluct,z";

/// Per-round CSV; `z` holds the conditional-outlier scores for the same rounds.
inline void write_round_csv(std::ostream& os, std::span<const BitRound> rounds, std::span<const double> z) {
  if (z.size() != rounds.size()) throw std::invalid_argument("write_round_csv: z length mismatch");
  os << kRoundCsvHeader << '\n';
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const auto& r = rounds[i];
    os << r.round << ',' << to_string(r.bob_basis) << ',' << format_g17(r.bob_fluct) << ','
       << format_g17(r.alice_fluct) << ',' << format_g17(z[i]) << '\n';
  }
}

}  // namespace eprqkd
