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

#include "cellfree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cellfree/errors.hpp"
#include "cellfree/power_control.hpp"

namespace cellfree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

struct ReceiverInfo {
  Receiver receiver;
  std::string_view label;
};

constexpr ReceiverInfo kReceivers[] = {
    {Receiver::kMF, "MF"},
    {Receiver::kMMSE, "MMSE"},
    {Receiver::kPmmseSmart, "PMMSE-smart"},
    {Receiver::kPmmseRandom, "PMMSE-random"},
    {Receiver::kLSFD, "LSFD"},
    {Receiver::kDePmmse, "DE-PMMSE"},
};

RngStream snapshot_stream(const ExperimentConfig& config, std::size_t s) {
  return RngStream(config.master_seed).derive(StreamTag::kSnapshot).derive(s);
}

struct SnapshotResult {
  // One row per enabled receiver (config order), K entries each.
  std::vector<std::vector<double>> rates;
  std::vector<Diagnostic> diagnostics;
  std::exception_ptr failure;
};

class SnapshotRunner {
 public:
  SnapshotRunner(const ExperimentConfig& config, const RunOptions& options, std::size_t s)
      : config_(config), options_(options), s_(s), k_(config.num_users) {}

  SnapshotResult run() {
    SnapshotResult out;
    out.rates.assign(config_.receivers.size(), std::vector<double>(k_, kNaN));
    try {
      const Snapshot snap = draw_snapshot(config_, s_);
      large_scale_receivers(snap, out);
      small_scale_receivers(snap, out);
    } catch (const std::exception& e) {
      if (!options_.keep_going) {
        out.failure = std::current_exception();
      } else {
        out.diagnostics.push_back({s_, std::nullopt, e.what()});
      }
    }
    return out;
  }

 private:
  std::size_t row(Receiver r) const {
    return static_cast<std::size_t>(
        std::find(config_.receivers.begin(), config_.receivers.end(), r) -
        config_.receivers.begin());
  }

  // Runs `fn` for user k, converting numerical failures into tagged
  // diagnostics (keep-going) or a tagged exception.
  template <typename Fn>
  void guarded(SnapshotResult& out, std::size_t k, Fn&& fn) {
    try {
      fn();
    } catch (const NumericalError& e) {
      const std::string msg = "snapshot " + std::to_string(s_) + ", user " +
                              std::to_string(k) + ": " + e.what();
      if (!options_.keep_going) throw NumericalError(msg);
      out.diagnostics.push_back({s_, k, e.what()});
    }
  }

  void large_scale_receivers(const Snapshot& snap, SnapshotResult& out) {
    const EstimationState& est = snap.est;
    if (config_.enabled(Receiver::kMF) || config_.enabled(Receiver::kLSFD)) {
      const Eigen::MatrixXd gain = pilot_gain_coefficients(est.beta, snap.pilots, est.rho);
      const Eigen::VectorXd beta_eta = est.beta * est.eta;
      for (std::size_t k = 0; k < k_; ++k) {
        guarded(out, k, [&] {
          const auto stats = lsfd_statistics(k, est.beta, gain, snap.pilots, est.rho, beta_eta);
          if (config_.enabled(Receiver::kMF)) {
            out.rates[row(Receiver::kMF)][k] =
                std::log2(1.0 + mf_sinr_lsfd_frame(stats, est.eta, config_.mf_mode));
          }
          if (config_.enabled(Receiver::kLSFD)) {
            out.rates[row(Receiver::kLSFD)][k] =
                std::log2(1.0 + lsfd_combiner_and_sinr(stats, est.eta).sinr);
          }
        });
      }
    }
    if (config_.enabled(Receiver::kDePmmse)) {
      for (std::size_t k = 0; k < k_; ++k) {
        guarded(out, k, [&] {
          const auto iset = pmmse_index_set(k, est.beta, snap.pilots);
          const double sinr = de_sinr_pmmse(make_de_inputs(k, est, snap.pilots, iset), config_.de);
          out.rates[row(Receiver::kDePmmse)][k] = std::log2(1.0 + sinr);
        });
      }
    }
  }

  void small_scale_receivers(const Snapshot& snap, SnapshotResult& out) {
    const bool mmse = config_.enabled(Receiver::kMMSE);
    const bool smart = config_.enabled(Receiver::kPmmseSmart);
    const bool random = config_.enabled(Receiver::kPmmseRandom);
    if (!mmse && !smart && !random) return;

    const EstimationState& est = snap.est;
    std::vector<PmmseIndexSet> smart_sets;
    std::vector<PmmseIndexSet> random_sets;
    std::vector<Eigen::VectorXd> smart_q;
    std::vector<Eigen::VectorXd> random_q;
    RngStream selection = snapshot_stream(config_, s_).derive(StreamTag::kPmmseRandom);
    for (std::size_t k = 0; k < k_; ++k) {
      if (smart) {
        smart_sets.push_back(pmmse_index_set(k, est.beta, snap.pilots));
        smart_q.push_back(pmmse_q(smart_sets.back(), est));
      }
      // Always consume the selection stream so it does not depend on flags.
      auto rs = pmmse_index_set_random(k, snap.pilots, selection);
      if (random) {
        random_sets.push_back(std::move(rs));
        random_q.push_back(pmmse_q(random_sets.back(), est));
      }
    }

    std::vector<std::vector<double>> sums(config_.receivers.size(), std::vector<double>(k_, 0.0));
    std::vector<bool> failed(k_, false);
    const RngStream base = RngStream(config_.master_seed).derive(StreamTag::kRealization).derive(s_);
    for (std::size_t r = 0; r < config_.n_realizations; ++r) {
      const RngStream rr = base.derive(r);
      RngStream small = rr.derive(StreamTag::kSmallScale);
      RngStream noise = rr.derive(StreamTag::kPilotNoise);
      const ChannelRealization ch =
          make_channel(est.beta, draw_small_scale(est.num_aps(), k_, small));
      const Eigen::MatrixXcd ghat = estimate_channels(ch.g, est.beta, snap.pilots, est.rho, noise);

      std::optional<MmseReceiver> receiver;
      if (mmse) receiver.emplace(ghat, est);
      for (std::size_t k = 0; k < k_; ++k) {
        if (failed[k]) continue;
        guarded(out, k, [&] {
          if (mmse) sums[row(Receiver::kMMSE)][k] += std::log2(1.0 + receiver->sinr(k));
          if (smart) {
            const auto solver = estimate_covariance(smart_q[k], ghat, est, smart_sets[k].members);
            sums[row(Receiver::kPmmseSmart)][k] += std::log2(
                1.0 + pmmse_sinr(solver, smart_sets[k], k, ghat, est));
          }
          if (random) {
            const auto solver =
                estimate_covariance(random_q[k], ghat, est, random_sets[k].members);
            sums[row(Receiver::kPmmseRandom)][k] += std::log2(
                1.0 + pmmse_sinr(solver, random_sets[k], k, ghat, est));
          }
          return;
        });
        if (!out.diagnostics.empty() && out.diagnostics.back().user == k &&
            out.diagnostics.back().snapshot == s_) {
          failed[k] = true;
        }
      }
    }
    const double n = static_cast<double>(config_.n_realizations);
    for (Receiver rcv : {Receiver::kMMSE, Receiver::kPmmseSmart, Receiver::kPmmseRandom}) {
      if (!config_.enabled(rcv)) continue;
      for (std::size_t k = 0; k < k_; ++k) {
        out.rates[row(rcv)][k] = failed[k] ? kNaN : sums[row(rcv)][k] / n;
      }
    }
  }

  static double pmmse_sinr(const DiagonalPlusLowRank<std::complex<double>>& solver,
                           const PmmseIndexSet& iset, std::size_t k, const Eigen::MatrixXcd& ghat,
                           const EstimationState& est) {
    if (est.eta(idx(k)) == 0.0) return 0.0;
    const auto pos = std::lower_bound(iset.members.begin(), iset.members.end(), k) -
                     iset.members.begin();
    return instantaneous_sinr(solver.solve_column(pos), k, ghat, est);
  }

  const ExperimentConfig& config_;
  const RunOptions& options_;
  std::size_t s_;
  std::size_t k_;
};

}  // namespace

std::string_view receiver_label(Receiver r) {
  for (const auto& info : kReceivers) {
    if (info.receiver == r) return info.label;
  }
  return "?";
}

std::optional<Receiver> parse_receiver(std::string_view label) {
  for (const auto& info : kReceivers) {
    if (info.label == label) return info.receiver;
  }
  return std::nullopt;
}

const std::vector<Receiver>& all_receivers() {
  static const std::vector<Receiver> all = {Receiver::kMF,          Receiver::kMMSE,
                                            Receiver::kPmmseSmart,  Receiver::kPmmseRandom,
                                            Receiver::kLSFD,        Receiver::kDePmmse};
  return all;
}

void ExperimentConfig::validate() const {
  if (num_aps == 0) throw ConfigError("M", "must be >= 1");
  if (num_users == 0) throw ConfigError("K", "must be >= 1");
  if (tau == 0) throw ConfigError("tau", "must be >= 1");
  if (tau > num_users) throw ConfigError("tau", "must not exceed K");
  if (n_snapshots == 0) throw ConfigError("snapshots", "must be >= 1");
  if (n_realizations == 0) throw ConfigError("realizations", "must be >= 1");
  if (receivers.empty()) throw ConfigError("receivers", "at least one receiver is required");
  area.validate();
  shadowing.validate();
  noise.validate();
  if (!(path_loss.f_mhz > 0.0)) throw ConfigError("path_loss.frequency", "must be > 0");
  if (!(path_loss.h_b_m > 0.0)) throw ConfigError("path_loss.h_b_m", "must be > 0");
  if (!(path_loss.h_r_m > 0.0)) throw ConfigError("path_loss.h_r_m", "must be > 0");
}

bool ExperimentConfig::enabled(Receiver r) const {
  return std::find(receivers.begin(), receivers.end(), r) != receivers.end();
}

Snapshot draw_snapshot(const ExperimentConfig& config, std::size_t s) {
  const RngStream root = snapshot_stream(config, s);
  RngStream layout_rng = root.derive(StreamTag::kLayout);
  RngStream shadow_rng = root.derive(StreamTag::kShadowing);
  RngStream pilot_rng = root.derive(StreamTag::kPilots);

  Snapshot snap;
  snap.layout = generate_layout(config.num_aps, config.num_users, config.area, layout_rng);
  snap.fading = large_scale_fading(snap.layout, config.area, config.path_loss, config.shadowing,
                                   shadow_rng);
  snap.pilots = assign_pilots_random(config.num_users, config.tau, pilot_rng);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(idx(config.num_users));
  snap.est = alpha_coefficients(snap.fading.beta, snap.pilots, config.rho(), ones);
  if (config.power_control) {
    const LsfdContext ctx(snap.fading.beta, snap.pilots, config.rho());
    snap.est = snap.est.with_eta(maxmin_bisection(ctx).eta);
  }
  return snap;
}

std::vector<double> ReceiverSamples::pool() const {
  std::vector<double> out;
  out.reserve(rates.size());
  for (double r : rates) {
    if (std::isfinite(r)) out.push_back(r);
  }
  return out;
}

const ReceiverSamples& RateSamples::get(Receiver r) const {
  for (const auto& rs : receivers) {
    if (rs.receiver == r) return rs;
  }
  throw std::invalid_argument("receiver " + std::string(receiver_label(r)) + " was not run");
}

double RateSamples::rate(Receiver r, std::size_t snapshot, std::size_t user) const {
  return get(r).rates[snapshot * num_users + user];
}

std::size_t thread_count_from_env() {
  if (const char* env = std::getenv("CELLFREE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RateSamples run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::size_t n = config.n_snapshots;
  std::vector<SnapshotResult> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < n; s = next++) {
      results[s] = SnapshotRunner(config, options, s).run();
    }
  };
  const std::size_t threads =
      std::min(n, options.threads > 0 ? options.threads : thread_count_from_env());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  RateSamples out;
  out.num_users = config.num_users;
  out.num_snapshots = n;
  for (std::size_t r = 0; r < config.receivers.size(); ++r) {
    ReceiverSamples rs;
    rs.receiver = config.receivers[r];
    rs.rates.reserve(n * config.num_users);
    for (std::size_t s = 0; s < n; ++s) {
      if (results[s].failure) std::rethrow_exception(results[s].failure);
      for (double v : results[s].rates[r]) {
        rs.rates.push_back(v);
        if (!std::isfinite(v)) ++rs.excluded;
      }
    }
    out.receivers.push_back(std::move(rs));
  }
  for (auto& res : results) {
    out.diagnostics.insert(out.diagnostics.end(), res.diagnostics.begin(), res.diagnostics.end());
  }
  return out;
}

std::vector<ExperimentConfig> figure_preset(std::string_view id) {
  std::vector<ExperimentConfig> out;
  auto base = [](std::size_t m, std::size_t k, std::size_t tau, bool independent) {
    ExperimentConfig c;
    c.num_aps = m;
    c.num_users = k;
    c.tau = tau;
    c.shadowing.independent = independent;
    c.label = "M" + std::to_string(m) + "_K" + std::to_string(k) + "_tau" + std::to_string(tau) +
              (independent ? "_indep" : "_corr");
    return c;
  };
  if (id == "fig1") {
    out.push_back(base(1000, 50, 10, true));
  } else if (id == "fig2") {
    for (bool independent : {false, true}) {
      for (std::size_t m : {64, 128, 256, 512}) {
        auto c = base(m, 16, 4, independent);
        c.receivers = {Receiver::kMMSE, Receiver::kPmmseSmart, Receiver::kDePmmse};
        out.push_back(std::move(c));
      }
    }
  } else if (id == "fig3") {
    // M/K = 8, K/tau = 4 (tau rounded to nearest for K = 50).
    for (std::size_t k : {16, 32, 50}) {
      auto c = base(8 * k, k, static_cast<std::size_t>(std::lround(k / 4.0)), false);
      c.receivers = {Receiver::kMMSE, Receiver::kPmmseSmart};
      out.push_back(std::move(c));
    }
  } else {
    throw ConfigError("figure", "unknown figure preset '" + std::string(id) + "'");
  }
  for (auto& c : out) c.label = std::string(id) + "_" + c.label;
  return out;
}

}  // namespace cellfree
