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


// Command-line entry point: runs one or more experiments and writes plot
// data tables. Thread count comes from CELLFREE_THREADS.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cellfree/config.hpp"
#include "cellfree/errors.hpp"
#include "cellfree/harness.hpp"
#include "cellfree/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiagnostics = 3;

struct Flags {
  std::string config_path;
  std::string figure;
  std::optional<std::uint64_t> seed;
  std::string receivers;
  std::optional<std::size_t> snapshots;
  std::optional<std::size_t> realizations;
  bool power_control = false;
  std::string output = "results";
  std::string format = "csv";
  bool keep_going = false;
  std::vector<std::string> overrides;
};

std::vector<cellfree::ExperimentConfig> resolve(const Flags& f) {
  using namespace cellfree;
  std::vector<ExperimentConfig> configs;
  if (!f.figure.empty() && !f.config_path.empty()) {
    throw ConfigError("--figure", "cannot be combined with --config");
  }
  if (!f.figure.empty()) {
    configs = figure_preset(f.figure);
  } else if (!f.config_path.empty()) {
    configs.push_back(parse_config_file(f.config_path));
  } else {
    configs.emplace_back();
  }
  for (auto& c : configs) {
    if (f.seed) c.master_seed = *f.seed;
    if (!f.receivers.empty()) c.receivers = parse_receiver_list(f.receivers);
    if (f.snapshots) c.n_snapshots = *f.snapshots;
    if (f.realizations) c.n_realizations = *f.realizations;
    if (f.power_control) c.power_control = true;
    c = apply_overrides(c, f.overrides);
    c.validate();
  }
  return configs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink cell-free massive MIMO rate simulator"};
  Flags f;
  app.add_option("--config", f.config_path, "YAML experiment file")->check(CLI::ExistingFile);
  app.add_option("--figure", f.figure, "Built-in preset")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--receivers", f.receivers,
                 "Comma-separated subset of MF,MMSE,PMMSE-smart,PMMSE-random,LSFD,DE-PMMSE");
  app.add_option("--snapshots", f.snapshots, "Network snapshots per experiment");
  app.add_option("--realizations", f.realizations, "Channel realizations per snapshot");
  app.add_flag("--power-control", f.power_control, "Apply max-min power control");
  app.add_option("--output", f.output, "Output directory")->capture_default_str();
  app.add_option("--format", f.format, "Table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--keep-going", f.keep_going,
               "Record numerical failures as diagnostics instead of aborting");
  app.add_option("--set", f.overrides, "Config override key=value (repeatable)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::vector<cellfree::ExperimentConfig> configs;
  try {
    configs = resolve(f);
  } catch (const cellfree::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto format =
      f.format == "json" ? cellfree::OutputFormat::kJson : cellfree::OutputFormat::kCsv;
  cellfree::RunOptions options;
  options.keep_going = f.keep_going;
  options.threads = cellfree::thread_count_from_env();

  bool diagnostics = false;
  for (const auto& config : configs) {
    const std::filesystem::path dir = std::filesystem::path(f.output) / config.label;
    std::cerr << config.label << ": M=" << config.num_aps << " K=" << config.num_users
              << " tau=" << config.tau << " snapshots=" << config.n_snapshots
              << " realizations=" << config.n_realizations << '\n';
    const auto start = std::chrono::steady_clock::now();
    cellfree::RateSamples samples;
    try {
      samples = cellfree::run_experiment(config, options);
    } catch (const cellfree::NumericalError& e) {
      std::cerr << "numerical error: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const cellfree::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& d : samples.diagnostics) {
      std::cerr << "diagnostic: snapshot " << d.snapshot;
      if (d.user) std::cerr << ", user " << *d.user;
      std::cerr << ": " << d.message << '\n';
    }
    diagnostics = diagnostics || !samples.diagnostics.empty();
    try {
      cellfree::write_results(dir, config, samples, format);
      cellfree::write_manifest(dir, config, samples, {secs, options.threads});
    } catch (const std::exception& e) {
      std::cerr << "output error: " << e.what() << '\n';
      return kExitNumerical;
    }
    for (const auto& row : cellfree::summarize(samples)) {
      std::cerr << "  " << cellfree::receiver_label(row.receiver)
                << " outage5=" << cellfree::format_number(row.outage_5pct)
                << " mean=" << cellfree::format_number(row.mean) << " n=" << row.count << '\n';
    }
    std::cerr << "  wrote " << dir.string() << " in " << secs << " s\n";
  }
  return diagnostics ? kExitDiagnostics : kExitOk;
}
