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

#include <cstdint>
#include <random>
#include <string_view>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace eprqkd {

/// Identifier written into every report so a run can be reproduced bit-for-bit.
///
/// Each independent stream is a std::mt19937_64 (whose output sequence is fixed
/// by the standard) seeded through std::seed_seq with the 32-bit halves of
/// (seed, stream index, stream tag). Normals come from Boost's ziggurat
/// normal_distribution, uniforms from boost::random::uniform_01; both are
/// header-defined and so identical on every platform.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64/seed_seq(seed,stream,tag)/boost-ziggurat-normal/v1";

/// Rounds of a protocol run are grouped into blocks of this size; each block
/// owns one stream, which makes the output independent of the worker count.
inline constexpr std::size_t kRoundsPerStream = 1024;

/// Stream tags separate unrelated consumers of the same seed.
enum class StreamTag : std::uint32_t {
  kSampling = 1,
  kProtocol = 2,
  kMessage = 3,
  kCalibration = 4,
  kEveOnly = 5,
  kBlockDecode = 6,
  kProperty = 7,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, StreamTag tag = StreamTag::kSampling)
      : engine_(make_engine(seed, stream, tag)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }
  std::uint64_t bits() { return engine_(); }

 private:
  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, StreamTag tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

/// Derives a child seed, e.g. one per sweep point or repeat.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace eprqkd
