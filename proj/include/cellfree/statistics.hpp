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

#include <span>
#include <vector>

namespace cellfree {

/// Right-continuous empirical CDF as (value, F(value)) pairs at the distinct
/// sorted sample values.
struct CdfPoint {
  double value;
  double cdf;
};

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);

/// Lower empirical p-quantile by nearest rank: the ceil(p n)-th smallest
/// sample (at least the first).
double outage_rate(std::span<const double> samples, double p = 0.05);

double sample_mean(std::span<const double> samples);
double sample_median(std::span<const double> samples);

}  // namespace cellfree
