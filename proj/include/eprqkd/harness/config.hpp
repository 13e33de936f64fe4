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

// Scenario configuration files (YAML). Example:
//
//   scenario: attack-sweep
//   seed: 7
//   protocol: {kappa_t: 0.5, rounds: 10000}
//   eve: {model: beamsplitter-tap, eta_tap: 0.9}
//   sweep: {param: eve.eta_tap, grid: "0.5:1.0:0.05", repeats: 20}
//   output: {report: sweep.json, csv: sweep.csv}
//
// Unknown keys are rejected with their position.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "eprqkd/bell.hpp"
#include "eprqkd/protocol_config.hpp"

namespace eprqkd {

/// Malformed configuration text; line and column are 1-based (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line, int column)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ")"
                                    : message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class ScenarioKind { Simulate, EprCheck, AttackSweep, Bell };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Simulate: return "simulate";
    case ScenarioKind::EprCheck: return "epr-check";
    case ScenarioKind::AttackSweep: return "attack-sweep";
    case ScenarioKind::Bell: return "bell";
  }
  return "?";
}

struct SweepGrid {
  std::string param = "eve.eta_tap";
  std::string spec;  // as written, e.g. "0.5:1.0:0.05"
  std::vector<double> values;
  std::uint64_t repeats = 20;
};

struct OutputPaths {
  std::string report;      // JSON report; empty writes it to stdout
  std::string csv;         // per-round (simulate) or per-point (attack-sweep) table
  std::string transcript;  // public transcript JSON (simulate)
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Simulate;
  ProtocolConfig protocol;
  BellSpec bell;
  SweepGrid sweep;
  OutputPaths output;
};

/// Values of "start:stop:step", inclusive of stop when it lies on the grid.
/// A negative step walks downward.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw FieldError("grid", "cannot parse '" + item + "' as a number");
    }
    if (used != item.size() || !std::isfinite(v)) throw FieldError("grid", "cannot parse '" + item + "' as a number");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw FieldError("grid", "expected start:stop:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (step == 0.0) throw FieldError("grid", "step must be non-zero");
  if ((b - a) / step < -1e-9) throw FieldError("grid", "step sign does not lead from start to stop");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 1000000) throw FieldError("grid", "too many points");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = a + static_cast<double>(k) * step;
  return out;
}

/// Sets one sweepable parameter by its config path.
inline void apply_parameter(ScenarioConfig& cfg, const std::string& name, double value) {
  auto& p = cfg.protocol;
  if (name == "channel_eta") { p.channel_eta = value; return; }
  if (name == "kappa_t") { p.kappa_t = value; return; }
  if (name == "alpha0") { p.alpha0 = value; return; }
  if (name == "alpha1") { p.alpha1 = value; return; }
  if (name == "alarm_z") { p.alarm_z = value; return; }
  if (name == "outlier_z") { p.outlier_z = value; return; }
  bool done = false;
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, eve::InterceptResend>) {
          if (name == "eve.r") { m.r = value; done = true; }
        } else if constexpr (std::is_same_v<T, eve::BeamsplitterTap>) {
          if (name == "eve.eta_tap") { m.eta_tap = value; done = true; }
        } else if constexpr (std::is_same_v<T, eve::QndTap>) {
          if (name == "eve.eta_tap") { m.eta_tap = value; done = true; }
          if (name == "eve.r_sq") { m.r_sq = value; done = true; }
        }
      },
      p.eve);
  if (!done) throw FieldError("sweep.param", "'" + name + "' is not sweepable for eve model " + model_name(p.eve));
}

namespace detail {

inline ConfigError node_error(const YAML::Node& n, const std::string& msg) {
  const auto m = n.Mark();
  return m.is_null() ? ConfigError(msg, 0, 0) : ConfigError(msg, m.line + 1, m.column + 1);
}

inline void require_map(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) throw node_error(n, "'" + where + "' must be a mapping");
}

inline void reject_unknown(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw node_error(kv.first, "unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw node_error(n, "'" + field + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw node_error(n, "'" + field + "' has the wrong type");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& prefix, T& out) {
  if (const auto n = parent[key]) out = scalar<T>(n, prefix + key);
}

inline Quadrature parse_quadrature(const YAML::Node& n, const std::string& field) {
  const auto s = scalar<std::string>(n, field);
  if (s == "X" || s == "x") return Quadrature::X;
  if (s == "P" || s == "p") return Quadrature::P;
  throw node_error(n, "'" + field + "' must be X or P");
}

inline EveModel parse_eve(const YAML::Node& n) {
  require_map(n, "eve");
  const auto model = n["model"] ? scalar<std::string>(n["model"], "eve.model") : std::string("none");
  Quadrature q = Quadrature::X;
  if (n["measures"]) q = parse_quadrature(n["measures"], "eve.measures");
  if (model == "none") {
    reject_unknown(n, {"model"}, "eve");
    return eve::None{};
  }
  if (model == "intercept-resend") {
    reject_unknown(n, {"model", "r", "measures"}, "eve");
    eve::InterceptResend m{.measures = q};
    read(n, "r", "eve.", m.r);
    return m;
  }
  if (model == "beamsplitter-tap") {
    reject_unknown(n, {"model", "eta_tap", "measures"}, "eve");
    eve::BeamsplitterTap m{.measures = q};
    read(n, "eta_tap", "eve.", m.eta_tap);
    return m;
  }
  if (model == "qnd-tap") {
    reject_unknown(n, {"model", "eta_tap", "r_sq", "measures"}, "eve");
    eve::QndTap m{.measures = q};
    read(n, "eta_tap", "eve.", m.eta_tap);
    read(n, "r_sq", "eve.", m.r_sq);
    return m;
  }
  throw node_error(n["model"], "unknown eve.model '" + model + "'");
}

inline std::vector<std::uint8_t> parse_message(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "protocol.message");
  std::vector<std::uint8_t> bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw node_error(n, "'protocol.message' must be a string of 0 and 1");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return bits;
}

inline void parse_protocol(const YAML::Node& n, ProtocolConfig& p) {
  require_map(n, "protocol");
  reject_unknown(n,
                 {"alpha0", "alpha1", "kappa_t", "channel_eta", "rounds", "alarm_z", "outlier_z", "outlier_margin",
                  "n_calibration", "workers", "message"},
                 "protocol");
  read(n, "alpha0", "protocol.", p.alpha0);
  read(n, "alpha1", "protocol.", p.alpha1);
  read(n, "kappa_t", "protocol.", p.kappa_t);
  read(n, "channel_eta", "protocol.", p.channel_eta);
  read(n, "rounds", "protocol.", p.rounds);
  read(n, "alarm_z", "protocol.", p.alarm_z);
  read(n, "outlier_z", "protocol.", p.outlier_z);
  read(n, "outlier_margin", "protocol.", p.outlier_margin);
  read(n, "n_calibration", "protocol.", p.n_calibration);
  read(n, "workers", "protocol.", p.workers);
  if (n["message"]) p.message = parse_message(n["message"]);
}

inline void parse_angles(const YAML::Node& n, AngleSet& a) {
  require_map(n, "bell.angles");
  reject_unknown(n, {"theta", "theta_prime", "phi", "phi_prime"}, "bell.angles");
  read(n, "theta", "bell.angles.", a.theta);
  read(n, "theta_prime", "bell.angles.", a.theta_prime);
  read(n, "phi", "bell.angles.", a.phi);
  read(n, "phi_prime", "bell.angles.", a.phi_prime);
}

inline BellStateKind parse_bell_kind(const std::string& s) {
  if (s == "pair-coherent") return BellStateKind::PairCoherent;
  if (s == "cat") return BellStateKind::Cat;
  throw FieldError("bell.state", "must be pair-coherent or cat");
}

inline BellSpec parse_bell(const YAML::Node& n) {
  require_map(n, "bell");
  reject_unknown(n,
                 {"state", "r0", "alpha0", "beta0", "kappa_t", "truncation", "loss_eta", "shifted", "angles",
                  "tail_bound"},
                 "bell");
  BellStateKind kind = BellStateKind::PairCoherent;
  if (n["state"]) {
    try {
      kind = parse_bell_kind(scalar<std::string>(n["state"], "bell.state"));
    } catch (const FieldError& e) {
      throw node_error(n["state"], e.what());
    }
  }
  BellSpec s = default_bell_spec(kind);
  read(n, "r0", "bell.", s.r0);
  read(n, "alpha0", "bell.", s.alpha0);
  read(n, "beta0", "bell.", s.beta0);
  read(n, "kappa_t", "bell.", s.kappa_t);
  read(n, "truncation", "bell.", s.truncation);
  read(n, "loss_eta", "bell.", s.loss_eta);
  read(n, "shifted", "bell.", s.shifted);
  read(n, "tail_bound", "bell.", s.tail_bound);
  if (n["angles"]) parse_angles(n["angles"], s.angles);
  return s;
}

inline void parse_sweep(const YAML::Node& n, SweepGrid& g) {
  require_map(n, "sweep");
  reject_unknown(n, {"param", "grid", "repeats"}, "sweep");
  read(n, "param", "sweep.", g.param);
  read(n, "repeats", "sweep.", g.repeats);
  if (const auto grid = n["grid"]) {
    if (grid.IsSequence()) {
      g.values.clear();
      std::string spec;
      for (const auto& v : grid) {
        g.values.push_back(scalar<double>(v, "sweep.grid"));
        spec += (spec.empty() ? "" : ",") + v.as<std::string>();
      }
      g.spec = "[" + spec + "]";
    } else {
      g.spec = scalar<std::string>(grid, "sweep.grid");
      try {
        g.values = parse_grid(g.spec);
      } catch (const FieldError& e) {
        throw node_error(grid, std::string("sweep.") + e.what());
      }
    }
  }
}

}  // namespace detail

inline void validate(const BellSpec& s) {
  if (!(s.r0 > 0.0) || !std::isfinite(s.r0)) throw FieldError("bell.r0", "must be positive");
  if (!std::isfinite(s.alpha0) || !std::isfinite(s.beta0)) throw FieldError("bell.alpha0", "must be finite");
  if (!std::isfinite(s.kappa_t)) throw FieldError("bell.kappa_t", "must be finite");
  if (s.truncation < 1 || s.truncation > 200) throw FieldError("bell.truncation", "must lie in [1, 200]");
  if (!(s.loss_eta >= 0.0 && s.loss_eta <= 1.0)) throw FieldError("bell.loss_eta", "must lie in [0, 1]");
  if (!(s.tail_bound > 0.0)) throw FieldError("bell.tail_bound", "must be positive");
  for (double a : {s.angles.theta, s.angles.theta_prime, s.angles.phi, s.angles.phi_prime}) {
    if (!std::isfinite(a)) throw FieldError("bell.angles", "must be finite");
  }
}

inline void validate(const SweepGrid& g) {
  if (g.values.empty()) throw FieldError("sweep.grid", "must not be empty");
  if (g.repeats < 1) throw FieldError("sweep.repeats", "must be >= 1");
  if (g.values.size() > 1) {
    const bool up = g.values[1] > g.values[0];
    for (std::size_t k = 1; k < g.values.size(); ++k) {
      if ((g.values[k] > g.values[k - 1]) != up || g.values[k] == g.values[k - 1]) {
        throw FieldError("sweep.grid", "must be strictly monotone");
      }
    }
  }
}

/// Checks everything the chosen scenario will use.
inline void validate(const ScenarioConfig& c) {
  if (c.kind == ScenarioKind::Bell) {
    validate(c.bell);
    return;
  }
  validate(c.protocol);
  if (c.kind == ScenarioKind::AttackSweep) {
    validate(c.sweep);
    for (double v : c.sweep.values) {
      ScenarioConfig probe = c;
      apply_parameter(probe, c.sweep.param, v);
      validate(probe.protocol);
    }
  }
}

namespace detail {

// Parsing without the final range validation, so command-line overrides can
// be applied first.
inline ScenarioConfig parse_config_unvalidated(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("syntax error: " + e.msg, e.mark.is_null() ? 0 : e.mark.line + 1,
                      e.mark.is_null() ? 0 : e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping", 1, 1);
  detail::reject_unknown(root, {"scenario", "seed", "protocol", "eve", "sweep", "bell", "output"}, "");

  ScenarioConfig c;
  if (const auto k = root["scenario"]) {
    const auto s = detail::scalar<std::string>(k, "scenario");
    if (s == "simulate") c.kind = ScenarioKind::Simulate;
    else if (s == "epr-check") c.kind = ScenarioKind::EprCheck;
    else if (s == "attack-sweep") c.kind = ScenarioKind::AttackSweep;
    else if (s == "bell") c.kind = ScenarioKind::Bell;
    else throw detail::node_error(k, "unknown scenario '" + s + "'");
  }
  detail::read(root, "seed", "", c.protocol.seed);
  if (root["protocol"]) detail::parse_protocol(root["protocol"], c.protocol);
  if (root["eve"]) c.protocol.eve = detail::parse_eve(root["eve"]);
  if (root["sweep"]) detail::parse_sweep(root["sweep"], c.sweep);
  if (root["bell"]) c.bell = detail::parse_bell(root["bell"]);
  if (const auto o = root["output"]) {
    detail::require_map(o, "output");
    detail::reject_unknown(o, {"report", "csv", "transcript"}, "output");
    detail::read(o, "report", "output.", c.output.report);
    detail::read(o, "csv", "output.", c.output.csv);
    detail::read(o, "transcript", "output.", c.output.transcript);
  }
  return c;
}

}  // namespace detail

/// Parses and validates configuration text, applying defaults for absent keys.
inline ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig c = detail::parse_config_unvalidated(text);
  validate(c);
  return c;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

}  // namespace eprqkd
