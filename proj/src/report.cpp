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


#include "cellfree/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "cellfree/config.hpp"
#include "cellfree/statistics.hpp"

namespace cellfree {

const char* const kToolVersion = "0.1.0";

namespace {

using nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_samples_csv(std::ostream& os, const RateSamples& s) {
  os << "receiver,user,snapshot,rate\n";
  for (const auto& rs : s.receivers) {
    const auto label = receiver_label(rs.receiver);
    for (std::size_t snap = 0; snap < s.num_snapshots; ++snap) {
      for (std::size_t k = 0; k < s.num_users; ++k) {
        const double r = rs.rates[snap * s.num_users + k];
        if (!std::isfinite(r)) continue;
        os << label << ',' << k << ',' << snap << ',' << format_number(r) << '\n';
      }
    }
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<SummaryRow> summarize(const RateSamples& samples) {
  std::vector<SummaryRow> out;
  for (const auto& rs : samples.receivers) {
    SummaryRow row;
    row.receiver = rs.receiver;
    row.excluded = rs.excluded;
    const auto pool = rs.pool();
    row.count = pool.size();
    if (!pool.empty()) {
      row.outage_5pct = outage_rate(pool, 0.05);
      row.mean = sample_mean(pool);
    } else {
      row.outage_5pct = row.mean = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(row);
  }
  return out;
}

void write_results(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const RateSamples& samples, OutputFormat format) {
  std::filesystem::create_directories(dir);
  open_out(dir / "config.yaml") << config_to_yaml(config);
  const auto summary = summarize(samples);

  if (format == OutputFormat::kCsv) {
    auto smp = open_out(dir / "samples.csv");
    write_samples_csv(smp, samples);

    auto sum = open_out(dir / "summary.csv");
    sum << "receiver,outage_5pct,mean,count,excluded,seed\n";
    for (const auto& row : summary) {
      sum << receiver_label(row.receiver) << ',' << format_number(row.outage_5pct) << ','
          << format_number(row.mean) << ',' << row.count << ',' << row.excluded << ','
          << config.master_seed << '\n';
    }

    auto cdf = open_out(dir / "cdf.csv");
    cdf << "receiver,rate,cdf\n";
    for (const auto& rs : samples.receivers) {
      const auto pool = rs.pool();
      if (pool.empty()) continue;
      for (const auto& p : empirical_cdf(pool)) {
        cdf << receiver_label(rs.receiver) << ',' << format_number(p.value) << ','
            << format_number(p.cdf) << '\n';
      }
    }
    return;
  }

  ordered_json j;
  j["label"] = config.label;
  j["seed"] = config.master_seed;
  j["num_users"] = samples.num_users;
  j["num_snapshots"] = samples.num_snapshots;
  ordered_json& jsum = j["summary"] = ordered_json::array();
  for (const auto& row : summary) {
    jsum.push_back({{"receiver", receiver_label(row.receiver)},
                    {"outage_5pct", row.outage_5pct},
                    {"mean", row.mean},
                    {"count", row.count},
                    {"excluded", row.excluded},
                    {"seed", config.master_seed}});
  }
  ordered_json& jrates = j["samples"] = ordered_json::object();
  ordered_json& jcdf = j["cdf"] = ordered_json::object();
  for (const auto& rs : samples.receivers) {
    const std::string label(receiver_label(rs.receiver));
    // rates[snapshot][user]; excluded samples are null.
    ordered_json per_snap = ordered_json::array();
    for (std::size_t s = 0; s < samples.num_snapshots; ++s) {
      ordered_json row = ordered_json::array();
      for (std::size_t k = 0; k < samples.num_users; ++k) {
        const double r = rs.rates[s * samples.num_users + k];
        row.push_back(std::isfinite(r) ? ordered_json(r) : ordered_json(nullptr));
      }
      per_snap.push_back(std::move(row));
    }
    jrates[label] = std::move(per_snap);
    ordered_json c = {{"rate", ordered_json::array()}, {"cdf", ordered_json::array()}};
    const auto pool = rs.pool();
    if (!pool.empty()) {
      for (const auto& p : empirical_cdf(pool)) {
        c["rate"].push_back(p.value);
        c["cdf"].push_back(p.cdf);
      }
    }
    jcdf[label] = std::move(c);
  }
  open_out(dir / "results.json") << j.dump(1) << '\n';
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const RateSamples& samples, const RunInfo& info) {
  std::filesystem::create_directories(dir);
  ordered_json j;
  j["tool"] = "cellfree_sim";
  j["version"] = kToolVersion;
  j["label"] = config.label;
  j["seed"] = config.master_seed;
  j["config_yaml"] = config_to_yaml(config);
  j["snr"] = {{"transmit_power_w", config.noise.transmit_power_w},
              {"bandwidth_hz", config.noise.bandwidth_hz},
              {"noise_figure_db", config.noise.noise_figure_db},
              {"temperature_k", config.noise.temperature_k},
              {"noise_variance_w", config.noise.noise_variance_w()},
              {"rho", config.rho()},
              {"rho_db", 10.0 * std::log10(config.rho())}};
  ordered_json diag = ordered_json::array();
  for (const auto& d : samples.diagnostics) {
    diag.push_back({{"snapshot", d.snapshot},
                    {"user", d.user ? ordered_json(*d.user) : ordered_json(nullptr)},
                    {"message", d.message}});
  }
  j["diagnostics"] = std::move(diag);
  j["threads"] = info.threads;
  j["wall_seconds"] = info.wall_seconds;
  open_out(dir / "manifest.json") << j.dump(2) << '\n';
}

std::vector<SampleRow> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "receiver,user,snapshot,rate") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<SampleRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string receiver, user, snapshot, rate;
    if (!std::getline(ss, receiver, ',') || !std::getline(ss, user, ',') ||
        !std::getline(ss, snapshot, ',') || !std::getline(ss, rate)) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    out.push_back({receiver, std::stoul(user), std::stoul(snapshot), std::stod(rate)});
  }
  return out;
}

}  // namespace cellfree
