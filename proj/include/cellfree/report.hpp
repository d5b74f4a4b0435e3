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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cellfree/harness.hpp"

namespace cellfree {

/// Per-receiver summary over the pooled per-user rates.
struct SummaryRow {
  Receiver receiver = Receiver::kMMSE;
  double outage_5pct = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
  std::size_t excluded = 0;
};

std::vector<SummaryRow> summarize(const RateSamples& samples);

/// Shortest decimal form with 17 significant digits ("%.17g").
std::string format_number(double v);

enum class OutputFormat { kCsv, kJson };

/// Writes the result tables of one experiment into `dir` (created if needed).
///
/// CSV: samples.csv (receiver,user,snapshot,rate), summary.csv
/// (receiver,outage_5pct,mean,count,excluded,seed), cdf.csv (receiver,rate,cdf).
/// JSON: results.json holding the same three tables.
/// Both formats also write config.yaml (the resolved config).
void write_results(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const RateSamples& samples, OutputFormat format);

struct RunInfo {
  double wall_seconds = 0.0;
  std::size_t threads = 1;
};

/// manifest.json: resolved config, normalized SNR and its physical inputs,
/// seed, tool version, diagnostics and wall-clock duration.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const RateSamples& samples, const RunInfo& info);

struct SampleRow {
  std::string receiver;
  std::size_t user = 0;
  std::size_t snapshot = 0;
  double rate = 0.0;
};

std::vector<SampleRow> read_samples_csv(const std::filesystem::path& path);

extern const char* const kToolVersion;

}  // namespace cellfree
