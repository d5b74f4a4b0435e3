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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cellfree/channel.hpp"
#include "cellfree/det_equiv.hpp"
#include "cellfree/network_model.hpp"
#include "cellfree/receivers.hpp"

namespace cellfree {

enum class Receiver { kMF, kMMSE, kPmmseSmart, kPmmseRandom, kLSFD, kDePmmse };

/// Output labels: MF, MMSE, PMMSE-smart, PMMSE-random, LSFD, DE-PMMSE.
std::string_view receiver_label(Receiver r);
std::optional<Receiver> parse_receiver(std::string_view label);
const std::vector<Receiver>& all_receivers();

struct ExperimentConfig {
  std::size_t num_aps = 100;
  std::size_t num_users = 10;
  std::size_t tau = 5;
  AreaConfig area;
  PathLossParams path_loss = PathLossParams::cost231(1900.0, 15.0, 1.65);
  ShadowingParams shadowing;
  NoiseModel noise;
  std::vector<Receiver> receivers = all_receivers();
  std::size_t n_snapshots = 100;
  std::size_t n_realizations = 200;
  std::uint64_t master_seed = 1;
  bool power_control = false;
  MfCombinerMode mf_mode = MfCombinerMode::kAllOnes;
  DeOptions de;
  std::string label = "run";

  void validate() const;
  double rho() const { return noise.normalized_rho(); }
  bool enabled(Receiver r) const;
};

/// Large-scale state of one network snapshot.
struct Snapshot {
  Layout layout;
  LargeScaleFading fading;
  PilotAssignment pilots;
  EstimationState est;
};

/// Draws snapshot `s` from its own seeded streams (layout, shadowing, pilots),
/// then applies max-min power control when enabled.
Snapshot draw_snapshot(const ExperimentConfig& config, std::size_t s);

/// Per-user rates of one receiver, snapshot-major: rates[s * K + k]. NaN
/// marks a sample excluded by a diagnostic or a non-finite value.
struct ReceiverSamples {
  Receiver receiver = Receiver::kMMSE;
  std::vector<double> rates;
  std::size_t excluded = 0;

  /// Finite samples only, in index order.
  std::vector<double> pool() const;
};

struct Diagnostic {
  std::size_t snapshot = 0;
  std::optional<std::size_t> user;
  std::string message;
};

struct RateSamples {
  std::size_t num_users = 0;
  std::size_t num_snapshots = 0;
  std::vector<ReceiverSamples> receivers;
  std::vector<Diagnostic> diagnostics;

  const ReceiverSamples& get(Receiver r) const;
  double rate(Receiver r, std::size_t snapshot, std::size_t user) const;
};

struct RunOptions {
  std::size_t threads = 0;  // 0: CELLFREE_THREADS or hardware concurrency
  bool keep_going = false;  // record diagnostics instead of throwing
};

/// Runs all snapshots and channel realizations of an experiment. Output is
/// bit-identical for a given config regardless of the thread count.
RateSamples run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Experiment configurations for fig1, fig2 or fig3.
std::vector<ExperimentConfig> figure_preset(std::string_view id);

std::size_t thread_count_from_env();

}  // namespace cellfree
