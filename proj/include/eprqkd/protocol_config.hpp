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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eprqkd/gaussian_state.hpp"

namespace eprqkd {

/// A parameter outside its allowed range; `field` names the offending key.
class FieldError : public std::invalid_argument {
 public:
  FieldError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace eve {

struct None {};

/// Eve measures one quadrature of the whole beam with error variance 1/r and
/// resends a minimum-uncertainty state squeezed in that quadrature.
struct InterceptResend {
  double r = 2.0;
  Quadrature measures = Quadrature::X;
};

/// Partially transmitting beamsplitter with a vacuum ancilla; Bob receives
/// the eta_tap fraction.
struct BeamsplitterTap {
  double eta_tap = 0.9;
  Quadrature measures = Quadrature::X;
};

/// Tap with a squeezed ancilla (variance 1/r_sq in the measured quadrature,
/// r_sq in the conjugate one).
struct QndTap {
  double eta_tap = 0.9;
  double r_sq = 4.0;
  Quadrature measures = Quadrature::X;
};

}  // namespace eve

using EveModel = std::variant<eve::None, eve::InterceptResend, eve::BeamsplitterTap, eve::QndTap>;

inline const char* model_name(const EveModel& m) {
  return std::visit(
      [](const auto& v) -> const char* {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, eve::None>) return "none";
        else if constexpr (std::is_same_v<T, eve::InterceptResend>) return "intercept-resend";
        else if constexpr (std::is_same_v<T, eve::BeamsplitterTap>) return "beamsplitter-tap";
        else return "qnd-tap";
      },
      m);
}

inline void validate(const EveModel& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, eve::InterceptResend>) {
          if (!(v.r > 0.0) || !std::isfinite(v.r)) throw FieldError("eve.r", "must be positive");
        } else if constexpr (std::is_same_v<T, eve::BeamsplitterTap>) {
          if (!(v.eta_tap >= 0.0 && v.eta_tap <= 1.0)) throw FieldError("eve.eta_tap", "must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, eve::QndTap>) {
          if (!(v.eta_tap >= 0.0 && v.eta_tap <= 1.0)) throw FieldError("eve.eta_tap", "must lie in [0, 1]");
          if (!(v.r_sq >= 1.0) || !std::isfinite(v.r_sq)) throw FieldError("eve.r_sq", "must be >= 1");
        }
      },
      m);
}

struct ProtocolConfig {
  double alpha0 = 10.0;  // bit 1 input amplitude
  double alpha1 = 0.0;   // bit 0 input amplitude
  double kappa_t = 0.5;
  double channel_eta = 1.0;
  std::uint64_t rounds = 10000;
  EveModel eve = eve::None{};
  std::uint64_t seed = 1;
  double alarm_z = 3.0;
  double outlier_z = 3.0;
  double outlier_margin = 4.0;  // binomial standard errors above 2Q(outlier_z)
  std::uint64_t n_calibration = 100000;
  unsigned workers = 1;
  std::vector<std::uint8_t> message;  // empty: seeded pseudorandom bits

  /// Input amplitude for a bit value.
  double alpha(int bit) const { return bit ? alpha0 : alpha1; }
};

inline void validate(const ProtocolConfig& c) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(c.alpha0) || !finite(c.alpha1) || c.alpha1 < 0.0) throw FieldError("alpha1", "must be finite and >= 0");
  if (!(c.alpha0 > c.alpha1)) throw FieldError("alpha0", "must exceed alpha1");
  if (!(c.kappa_t > 0.0) || !finite(c.kappa_t)) throw FieldError("kappa_t", "must be positive");
  if (!(c.channel_eta >= 0.0 && c.channel_eta <= 1.0)) throw FieldError("channel_eta", "must lie in [0, 1]");
  if (c.rounds == 0) throw FieldError("rounds", "must be positive");
  if (!(c.alarm_z > 0.0)) throw FieldError("alarm_z", "must be positive");
  if (!(c.outlier_z > 0.0)) throw FieldError("outlier_z", "must be positive");
  if (!(c.outlier_margin >= 0.0)) throw FieldError("outlier_margin", "must be >= 0");
  if (c.n_calibration < 1000) throw FieldError("n_calibration", "must be >= 1000");
  if (c.workers == 0) throw FieldError("workers", "must be >= 1");
  for (auto b : c.message) {
    if (b > 1) throw FieldError("message", "bits must be 0 or 1");
  }
  validate(c.eve);
}

}  // namespace eprqkd
