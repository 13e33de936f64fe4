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

// Command-line front end. Exit status: 0 success, 2 when a simulate run
// raised the eavesdropping alarm, 1 on any error (a JSON error object is
// printed to stderr).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eprqkd/harness/config.hpp"
#include "eprqkd/harness/scenario.hpp"

namespace {

using namespace eprqkd;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string csv;
  std::string transcript;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  std::optional<unsigned> workers;
};

int finish(const ScenarioConfig& cfg) {
  const RunReport rep = run_scenario(cfg);
  const std::string doc = write_outputs(rep, cfg.output);
  if (!doc.empty()) std::fwrite(doc.data(), 1, doc.size(), stdout);
  std::fprintf(stderr, "eprqkd %s: done in %.3f s, exit %d\n", to_string(cfg.kind), rep.wall_time_s, rep.exit_code);
  return rep.exit_code;
}

ScenarioConfig load_for(ScenarioKind kind, const CommonOptions& o) {
  ScenarioConfig cfg = detail::parse_config_unvalidated(read_text_file(o.config));
  cfg.kind = kind;
  if (o.seed) cfg.protocol.seed = *o.seed;
  if (o.rounds) cfg.protocol.rounds = *o.rounds;
  if (o.workers) cfg.protocol.workers = *o.workers;
  if (!o.out.empty()) cfg.output.report = o.out;
  if (!o.csv.empty()) cfg.output.csv = o.csv;
  if (!o.transcript.empty()) cfg.output.transcript = o.transcript;
  return cfg;
}

void add_common(CLI::App* app, CommonOptions& o, bool protocol_overrides) {
  app->add_option("--config", o.config, "Scenario configuration file (YAML)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "JSON report path (default: stdout)");
  app->add_option("--csv", o.csv, "CSV output path");
  if (protocol_overrides) {
    app->add_option("--seed", o.seed, "Override the seed");
    app->add_option("--rounds", o.rounds, "Override the number of rounds");
  }
  app->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable EPR key distribution simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EPRQKD_VERSION);

  CommonOptions sim_opt, epr_opt, sweep_opt;
  auto* sim = app.add_subcommand("simulate", "Run the protocol and report the detection statistics");
  add_common(sim, sim_opt, true);
  sim->add_option("--transcript", sim_opt.transcript, "Public transcript JSON path");

  auto* epr = app.add_subcommand("epr-check", "Compare analytic, predicted and Monte Carlo EPR products");
  add_common(epr, epr_opt, true);

  std::string param, grid;
  std::optional<std::uint64_t> repeats;
  auto* sweep = app.add_subcommand("attack-sweep", "Sweep one parameter and tabulate attack signatures");
  add_common(sweep, sweep_opt, true);
  sweep->add_option("--param", param, "Parameter path, e.g. eve.eta_tap or channel_eta");
  sweep->add_option("--grid", grid, "start:stop:step (inclusive) or a single value");
  sweep->add_option("--repeats", repeats, "Protocol runs per grid point");

  std::string state = "pair-coherent", bell_out;
  std::optional<double> r0, alpha0, beta0, kt, loss_eta;
  std::optional<std::size_t> truncation;
  bool shifted = false;
  auto* bell = app.add_subcommand("bell", "Strong Bell-Clauser-Horne ratio for a non-Gaussian state");
  bell->add_option("--state", state, "pair-coherent or cat")->check(CLI::IsMember({"pair-coherent", "cat"}));
  bell->add_option("--r0", r0, "Pair-coherent amplitude");
  bell->add_option("--alpha0", alpha0, "Cat amplitude on mode a");
  bell->add_option("--beta0", beta0, "Cat amplitude on mode b");
  bell->add_option("--kt", kt, "Amplifier gain kappa t for the cat state");
  bell->add_option("--truncation", truncation, "Photon-number truncation per mode");
  bell->add_option("--loss-eta", loss_eta, "Intensity transmission applied to both modes");
  bell->add_flag("--shifted", shifted, "Apply the 180 degree phase encoding (angles shift by pi)");
  bell->add_option("--out", bell_out, "JSON report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*sim) return finish(load_for(ScenarioKind::Simulate, sim_opt));
    if (*epr) return finish(load_for(ScenarioKind::EprCheck, epr_opt));
    if (*sweep) {
      ScenarioConfig cfg = load_for(ScenarioKind::AttackSweep, sweep_opt);
      if (!param.empty()) cfg.sweep.param = param;
      if (!grid.empty()) {
        cfg.sweep.spec = grid;
        cfg.sweep.values = parse_grid(grid);
      }
      if (repeats) cfg.sweep.repeats = *repeats;
      return finish(cfg);
    }
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::Bell;
    cfg.bell = default_bell_spec(detail::parse_bell_kind(state));
    if (r0) cfg.bell.r0 = *r0;
    if (alpha0) cfg.bell.alpha0 = *alpha0;
    if (beta0) cfg.bell.beta0 = *beta0;
    if (kt) cfg.bell.kappa_t = *kt;
    if (truncation) cfg.bell.truncation = *truncation;
    if (loss_eta) cfg.bell.loss_eta = *loss_eta;
    if (shifted) {
      cfg.bell.shifted = true;
      cfg.bell.angles.theta += std::numbers::pi;
      cfg.bell.angles.theta_prime += std::numbers::pi;
    }
    cfg.output.report = bell_out;
    return finish(cfg);
  } catch (const std::exception& e) {
    std::cerr << error_document(e).dump() << '\n';
    return kExitError;
  }
}
