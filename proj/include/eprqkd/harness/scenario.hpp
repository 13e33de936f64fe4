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

#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eprqkd/adversary.hpp"
#include "eprqkd/bell.hpp"
#include "eprqkd/harness/config.hpp"
#include "eprqkd/harness/json_io.hpp"
#include "eprqkd/protocol.hpp"
#include "eprqkd/rng.hpp"

#ifndef EPRQKD_VERSION
#define EPRQKD_VERSION "0.1.0"
#endif

namespace eprqkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

inline constexpr const char* kSweepCsvHeader = "model,param,eta,var_x_new,var_p_new,product,eve_ber,alarm_rate";

struct RunReport {
  json config;  // echo; feeding it back as a config file reproduces the run
  std::string version = EPRQKD_VERSION;
  std::string rng{kRngAlgorithm};
  double wall_time_s = 0.0;
  json results;
  int exit_code = kExitOk;
  std::string csv;         // tabular output, empty when the scenario has none
  std::string transcript;  // public transcript JSON (simulate only)
};

/// Configuration echo in the same schema parse_config reads.
inline json config_to_json(const ScenarioConfig& c) {
  json j{{"scenario", to_string(c.kind)}};
  if (c.kind == ScenarioKind::Bell) {
    j["bell"] = bell_spec_to_json(c.bell);
    return j;
  }
  json proto = protocol_to_json(c.protocol);
  j["seed"] = proto["seed"];
  proto.erase("seed");
  j["protocol"] = proto;
  j["eve"] = eve_to_json(c.protocol.eve);
  if (c.kind == ScenarioKind::AttackSweep) {
    j["sweep"] = {{"param", c.sweep.param}, {"grid", c.sweep.values}, {"repeats", c.sweep.repeats}};
  }
  return j;
}

/// The report document written to disk. Wall time is reported separately so
/// that identical inputs give byte-identical files.
inline json report_document(const RunReport& r) {
  return json{{"tool", "eprqkd"},
              {"version", r.version},
              {"rng", r.rng},
              {"config", r.config},
              {"results", r.results}};
}

inline std::string dump_report(const RunReport& r) { return report_document(r).dump(2) + "\n"; }

/// Machine-readable error object for exit code 1.
inline json error_document(const std::exception& e) {
  json j{{"error", {{"type", "error"}, {"message", e.what()}}}};
  if (const auto* f = dynamic_cast<const FieldError*>(&e)) {
    j["error"]["type"] = "range";
    j["error"]["field"] = f->field();
  } else if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    j["error"]["type"] = "config";
    j["error"]["line"] = c->line();
    j["error"]["column"] = c->column();
  }
  return j;
}

/// Intensity transmission Bob sees from the eavesdropper's side: the tap
/// transmittance for tap models, otherwise the channel's.
inline double effective_eta(const ProtocolConfig& c) {
  if (const auto* t = std::get_if<eve::BeamsplitterTap>(&c.eve)) return t->eta_tap;
  if (const auto* q = std::get_if<eve::QndTap>(&c.eve)) return q->eta_tap;
  return c.channel_eta;
}

namespace detail {

inline json run_simulate(const ScenarioConfig& c, RunReport& rep) {
  const ProtocolRun run = run_protocol(c.protocol);
  json res = run_to_json(run);
  res["predicted_signature"] = predicted_signature(c.protocol.eve, c.protocol);
  std::ostringstream csv;
  write_round_csv(csv, run.rounds, run.outliers.z);
  rep.csv = csv.str();
  std::ostringstream tr;
  write_transcript_json(tr, run.rounds);
  rep.transcript = tr.str();
  rep.exit_code = run.report.alarm ? kExitAlarm : kExitOk;
  return res;
}

inline json run_epr_check(const ScenarioConfig& c) {
  const ProtocolConfig& p = c.protocol;
  ProtocolConfig clean = p;
  clean.eve = eve::None{};
  const InferenceResult analytic = inference_variance_analytic(encode_round(1, clean), kSignalMode, kIdlerMode);
  const AttackSignature predicted = predicted_signature(p.eve, p);
  const ProtocolRun run = run_protocol(p);
  const InferenceResult& emp = run.inference;
  const double z = emp.stderr_product > 0.0 ? (emp.product - predicted.product()) / emp.stderr_product : 0.0;
  return json{{"analytic_no_eve", analytic},
              {"predicted_signature", predicted},
              {"empirical", emp},
              {"z_product_vs_predicted", z},
              {"epr_criterion_analytic", epr_criterion(analytic)},
              {"epr_criterion_empirical", epr_criterion(emp)}};
}

struct SweepPoint {
  double value = 0.0;
  double eta = 0.0;
  AttackSignature predicted;
  double var_x = 0.0, var_p = 0.0, product = 0.0, eve_ber = 0.0, alarm_rate = 0.0;
  double product_sem = 0.0;
};

inline json run_sweep(const ScenarioConfig& c, RunReport& rep) {
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < c.sweep.values.size(); ++k) {
    ScenarioConfig pc = c;
    apply_parameter(pc, c.sweep.param, c.sweep.values[k]);
    SweepPoint pt;
    pt.value = c.sweep.values[k];
    pt.eta = effective_eta(pc.protocol);
    pt.predicted = predicted_signature(pc.protocol.eve, pc.protocol);
    const auto reps = static_cast<double>(c.sweep.repeats);
    double sum_sq = 0.0;
    std::uint64_t alarms = 0;
    for (std::uint64_t r = 0; r < c.sweep.repeats; ++r) {
      ProtocolConfig rc = pc.protocol;
      rc.seed = derive_seed(derive_seed(c.protocol.seed, k), r);
      const ProtocolRun run = run_protocol(rc);
      pt.var_x += run.inference.var_x_inf / reps;
      pt.var_p += run.inference.var_p_inf / reps;
      pt.product += run.inference.product / reps;
      sum_sq += run.inference.product * run.inference.product;
      pt.eve_ber += run.eve_ber / reps;
      alarms += run.report.alarm;
    }
    pt.alarm_rate = static_cast<double>(alarms) / reps;
    if (c.sweep.repeats > 1) {
      const double var = std::max(0.0, (sum_sq - reps * pt.product * pt.product) / (reps - 1.0));
      pt.product_sem = std::sqrt(var / reps);
    }
    points.push_back(pt);
  }

  const char* model = model_name(c.protocol.eve);
  std::ostringstream csv;
  csv << kSweepCsvHeader << '\n';
  json rows = json::array();
  for (const auto& pt : points) {
    csv << model << ',' << format_g17(pt.value) << ',' << format_g17(pt.eta) << ',' << format_g17(pt.var_x) << ','
        << format_g17(pt.var_p) << ',' << format_g17(pt.product) << ',' << format_g17(pt.eve_ber) << ','
        << format_g17(pt.alarm_rate) << '\n';
    rows.push_back({{"param", pt.value},
                    {"eta", pt.eta},
                    {"predicted", pt.predicted},
                    {"var_x_new", pt.var_x},
                    {"var_p_new", pt.var_p},
                    {"product", pt.product},
                    {"product_sem", pt.product_sem},
                    {"eve_ber", pt.eve_ber},
                    {"alarm_rate", pt.alarm_rate}});
  }
  rep.csv = csv.str();
  return json{{"model", model}, {"param", c.sweep.param}, {"repeats", c.sweep.repeats}, {"points", rows}};
}

}  // namespace detail

/// Runs one validated scenario. Files are not written here; see write_outputs.
inline RunReport run_scenario(const ScenarioConfig& config) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = config_to_json(config);
  switch (config.kind) {
    case ScenarioKind::Simulate: rep.results = detail::run_simulate(config, rep); break;
    case ScenarioKind::EprCheck: rep.results = detail::run_epr_check(config); break;
    case ScenarioKind::AttackSweep: rep.results = detail::run_sweep(config, rep); break;
    case ScenarioKind::Bell: rep.results = evaluate_bell(config.bell); break;
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Writes the configured CSV and transcript files; the report goes to
/// output.report, or is returned for the caller to print when that is empty.
inline std::string write_outputs(const RunReport& rep, const OutputPaths& out) {
  if (!out.csv.empty() && !rep.csv.empty()) write_file(out.csv, rep.csv);
  if (!out.transcript.empty() && !rep.transcript.empty()) write_file(out.transcript, rep.transcript);
  const std::string doc = dump_report(rep);
  if (!out.report.empty()) {
    write_file(out.report, doc);
    return {};
  }
  return doc;
}

}  // namespace eprqkd
