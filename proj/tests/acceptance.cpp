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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "eprqkd/harness/scenario.hpp"
#include "oracles/linear_modes.hpp"

using namespace eprqkd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), dt);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict analytic_prediction() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_oracle = 0.0;
  for (double kt : {0.25, 0.5, 1.0}) {
    const auto r = inference_variance_analytic(two_mode_squeeze(vacuum_state(2), 0, 1, kt), 0, 1);
    const double var = 1.0 / std::cosh(2 * kt), gamma = std::tanh(2 * kt);
    for (double d : {r.var_x_inf - var, r.var_p_inf - var, r.gamma_x - gamma, r.gamma_p - gamma}) {
      worst = std::max(worst, std::abs(d));
    }
    const auto amp = oracle::amplifier(kt);
    worst_oracle = std::max(worst_oracle, std::abs(oracle::min_inference_variance(amp.xa, amp.xb) - r.var_x_inf));
    worst_oracle = std::max(worst_oracle, std::abs(oracle::min_inference_variance(amp.pa, amp.pb) - r.var_p_inf));
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-12 && worst_oracle <= 1e-9 && dt < 1.0,
          fmt("max |error| %.2e (tol 1e-12), oracle gap %.2e, %.3f s (limit 1 s)", worst, worst_oracle, dt)};
}

Verdict monte_carlo_consistency() {
  ProtocolConfig c;
  c.rounds = 100000;
  c.workers = 1;
  c.seed = 1001;
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = run_protocol(c);
  const double dt = seconds_since(t0);
  const double expected = 1.0 / std::pow(std::cosh(1.0), 2);
  const double z = (run.inference.product - expected) / run.inference.stderr_product;
  return {std::abs(z) <= 4.0 && dt < 10.0,
          fmt("product %.5f vs %.5f, z = %.2f (limit 4), %.2f s (limit 10 s)", run.inference.product, expected, z, dt)};
}

Verdict benchmark_loss() {
  ProtocolConfig c;
  c.channel_eta = 0.4641055743632807;
  c.rounds = 100000;
  c.seed = 1002;
  const double predicted = predicted_signature(eve::None{}, c).product();
  const auto run = run_protocol(c);
  const double z = (run.inference.product - predicted) / run.inference.stderr_product;
  const bool ok = std::abs(predicted - 0.7) <= 0.01 && std::abs(z) <= 4.0 && !run.report.alarm;
  return {ok, fmt("eta %.6f: predicted %.5f (tol 0.7 +- 0.01), empirical %.5f (z %.2f, limit 4), alarm %s",
                  c.channel_eta, predicted,
                  run.inference.product, z, run.report.alarm ? "true" : "false")};
}

Verdict intercept_resend() {
  bool ok = true;
  double min_pred = 1e300, min_margin = 1e300;
  for (int k = 0; k <= 8; ++k) {
    const double r = std::pow(10.0, -1.0 + 0.25 * k);
    ProtocolConfig c;
    c.eve = eve::InterceptResend{r};
    c.seed = 2000 + static_cast<std::uint64_t>(k);
    const double pred = predicted_signature(c.eve, c).product();
    const auto run = run_protocol(c);
    const double margin = (run.inference.product - (1.0 - 4 * run.inference.stderr_product));
    min_pred = std::min(min_pred, pred);
    min_margin = std::min(min_margin, margin);
    ok = ok && pred >= 1.0 && margin >= 0.0;
  }
  int alarms = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    ProtocolConfig c;
    c.eve = eve::InterceptResend{};
    c.seed = derive_seed(4000, s);
    alarms += run_protocol(c).report.alarm;
  }
  ok = ok && alarms >= 99;
  return {ok, fmt("r in [0.1, 10] (9 log points): min predicted %.3f, min empirical margin over 1-4sigma %.3f; "
                  "alarm %d/100 (need >= 99)",
                  min_pred, min_margin, alarms)};
}

Verdict tap_and_qnd() {
  bool ok = true;
  double worst = 0.0;
  for (double eta : {0.5, 0.8, 0.95}) {
    for (double r_sq : {1.0, 4.0, 10.0}) {
      ProtocolConfig c;
      c.alpha0 = 50.0;
      c.rounds = 100000;
      c.eve = eve::QndTap{eta, r_sq};
      c.seed = derive_seed(5000, static_cast<std::uint64_t>(eta * 100 + r_sq));
      const auto run = run_protocol(c);
      const double d = 1.0 / std::cosh(2 * c.kappa_t);
      const double want_x = eta * d + (1 - eta) / r_sq;
      const double want_p = eta * d + (1 - eta) * r_sq;
      const double zx = (run.inference.var_x_inf - want_x) / run.inference.stderr_var_x;
      const double zp = (run.inference.var_p_inf - want_p) / run.inference.stderr_var_p;
      worst = std::max({worst, std::abs(zx), std::abs(zp)});
      ok = ok && std::abs(zx) <= 4.0 && std::abs(zp) <= 4.0;
    }
  }
  return {ok, fmt("3 x 3 grid of eta_tap x r_sq, worst |z| = %.2f (limit 4)", worst)};
}

Verdict loss_endpoint() {
  ProtocolConfig c;
  c.channel_eta = 0.0;
  c.rounds = 100000;
  c.seed = 1006;
  const auto run = run_protocol(c);
  const double zx = (run.inference.var_x_inf - 1.0) / run.inference.stderr_var_x;
  const double zp = (run.inference.var_p_inf - 1.0) / run.inference.stderr_var_p;
  return {std::abs(zx) <= 4.0 && std::abs(zp) <= 4.0,
          fmt("var_x %.5f (z %.2f), var_p %.5f (z %.2f), limit 4", run.inference.var_x_inf, zx, run.inference.var_p_inf,
              zp)};
}

Verdict bell_target(BellStateKind kind, double target) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = evaluate_bell(default_bell_spec(kind));
  const double dt = seconds_since(t0);
  const bool ok = std::abs(r.outcome.S - target) <= 0.003 && r.convergence_delta < 1e-4 && dt < 60.0;
  return {ok, fmt("S = %.10f (target %.4f +- 0.003), N = %zu, |S(N+10) - S(N)| = %.2e (limit 1e-4), tail %.1e, %.2f s",
                  r.outcome.S, target, r.spec.truncation, r.convergence_delta, r.tail_mass, dt)};
}

Verdict loss_kills_violation() {
  BellSpec spec = default_bell_spec(BellStateKind::PairCoherent);
  spec.loss_eta = amplitude_to_intensity(0.96);
  const double s_amp = evaluate_bell(spec).outcome.S;
  spec.loss_eta = 0.96;
  const double s_int = evaluate_bell(spec).outcome.S;
  return {s_amp <= 1.0, fmt("amplitude efficiency 0.96 (intensity %.4f): S = %.6f (need <= 1); "
                            "for reference intensity 0.96 gives S = %.6f",
                            amplitude_to_intensity(0.96), s_amp, s_int)};
}

Verdict lhv_bound() {
  std::mt19937_64 g(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = -1e300;
  int evaluated = 0;
  while (evaluated < 10000) {
    const int k = 1 + static_cast<int>(g() % 8);
    std::vector<LhvComponent> m(k);
    double total = 0.0;
    for (auto& c : m) {
      c.weight = u(g);
      total += c.weight;
      c.p_a = {g() % 4 ? u(g) : double(g() % 2), g() % 4 ? u(g) : double(g() % 2)};
      c.p_b = {g() % 4 ? u(g) : double(g() % 2), g() % 4 ? u(g) : double(g() % 2)};
    }
    double s = 0.0;
    for (int i = 0; i + 1 < k; ++i) s += (m[i].weight /= total);
    m.back().weight = 1.0 - s;
    double den = 0.0;
    for (const auto& c : m) den += c.weight * (c.p_a[1] + c.p_b[0]);
    if (den <= 0.0) continue;
    worst = std::max(worst, lhv_factorized_S(m));
    ++evaluated;
  }
  return {worst <= 1.0 + 1e-12, fmt("%d random factorized models, max S = %.15f (limit 1 + 1e-12)", evaluated, worst)};
}

Verdict phase_encoding() {
  double worst = 0.0;
  for (auto kind : {BellStateKind::PairCoherent, BellStateKind::Cat}) {
    BellSpec spec = default_bell_spec(kind);
    const double plain = bell_S(build_bell_state(spec, spec.truncation), spec.angles).S;
    spec.shifted = true;
    spec.angles.theta += kPi;
    spec.angles.theta_prime += kPi;
    const double shifted = bell_S(build_bell_state(spec, spec.truncation), spec.angles).S;
    worst = std::max(worst, std::abs(shifted - plain));
  }
  return {worst <= 1e-9, fmt("max |S_shifted - S| = %.2e over both states (limit 1e-9)", worst)};
}

Verdict false_positives() {
  int alarms = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    ProtocolConfig c;
    c.seed = derive_seed(12000, s);
    alarms += run_protocol(c).report.alarm;
  }
  return {alarms <= 1, fmt("no-Eve alarms %d/100 at alarm_z = 3 (limit 1%%)", alarms)};
}

Verdict determinism() {
  const char* configs[] = {
      "scenario: simulate\nseed: 77\nprotocol:\n  rounds: 20000\neve:\n  model: qnd-tap\n  eta_tap: 0.9\n  r_sq: 4\n",
      "scenario: attack-sweep\nseed: 78\nprotocol:\n  rounds: 5000\n  n_calibration: 10000\n"
      "eve:\n  model: beamsplitter-tap\nsweep:\n  param: eve.eta_tap\n  grid: '0.8:1.0:0.1'\n  repeats: 2\n",
  };
  bool ok = true;
  std::size_t bytes = 0;
  for (const char* text : configs) {
    ScenarioConfig c = parse_config(text);
    c.protocol.workers = 1;
    const auto a = run_scenario(c);
    c.protocol.workers = 8;
    const auto b = run_scenario(c);
    const std::string da = dump_report(a), db = dump_report(b);
    ok = ok && da == db && a.csv == b.csv && a.transcript == b.transcript;
    bytes += da.size();
  }
  return {ok, fmt("simulate and attack-sweep reports (%zu bytes) identical at 1 and 8 workers", bytes)};
}

}  // namespace

int main() {
  report(1, "analytic EPR prediction", analytic_prediction);
  report(2, "Monte Carlo consistency", monte_carlo_consistency);
  report(3, "benchmark product 0.7", benchmark_loss);
  report(4, "intercept-resend", intercept_resend);
  report(5, "tap and QND signatures", tap_and_qnd);
  report(6, "loss endpoint", loss_endpoint);
  report(7, "Bell pair-coherent", [] { return bell_target(BellStateKind::PairCoherent, 1.0157); });
  report(8, "Bell cat state", [] { return bell_target(BellStateKind::Cat, 1.008); });
  report(9, "loss kills violation", loss_kills_violation);
  report(10, "LHV bound", lhv_bound);
  report(11, "phase-encoding equivalence", phase_encoding);
  report(12, "false-positive control", false_positives);
  report(13, "determinism", determinism);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures ? 1 : 0;
}
