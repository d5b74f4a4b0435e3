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

#include "cellfree/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cellfree {

namespace {

std::vector<double> sorted_copy(std::span<const double> samples, const char* who) {
  if (samples.empty()) throw std::invalid_argument(std::string(who) + ": empty sample pool");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
  const auto v = sorted_copy(samples, "empirical_cdf");
  const double n = static_cast<double>(v.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

double outage_rate(std::span<const double> samples, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("outage_rate: p must lie in (0, 1]");
  const auto v = sorted_copy(samples, "outage_rate");
  // Guard against p * n landing a hair above an integer.
  const double scaled = p * static_cast<double>(v.size());
  auto rank = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * scaled));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

double sample_mean(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("sample_mean: empty sample pool");
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double sample_median(std::span<const double> samples) {
  const auto v = sorted_copy(samples, "sample_median");
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace cellfree
