/*
 * Copyright (c) 2026 The cellfree authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace cellfree {

/// Stage tags used to key independent random streams.
enum class StreamTag : std::uint64_t {
  kLayout = 1,
  kShadowing = 2,
  kPilots = 3,
  kPmmseRandom = 4,
  kSmallScale = 5,
  kPilotNoise = 6,
  kAsymptotic = 7,
  kSnapshot = 8,
  kRealization = 9,
};

/// A seeded random stream. Child streams are derived deterministically from
/// (parent seed, tag), so work units can be drawn in any order or on any
/// thread and still reproduce bit-exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream derive(std::uint64_t tag) const;
  RngStream derive(StreamTag tag) const { return derive(static_cast<std::uint64_t>(tag)); }

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal N(0, 1).
  double normal();
  /// Circularly-symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
  std::complex<double> complex_normal();
  /// Uniform integer on {0, ..., n-1}.
  std::size_t uniform_index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cellfree
