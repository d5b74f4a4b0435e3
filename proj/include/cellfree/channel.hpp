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
#include <vector>

#include <Eigen/Dense>

#include "cellfree/rng.hpp"

namespace cellfree {

/// Partition of the K users into tau pilot groups. Users and pilots are
/// 0-based; every group is nonempty and lists its users in increasing order.
class PilotAssignment {
 public:
  PilotAssignment() = default;
  /// Builds the assignment from a user -> pilot map. Throws if any pilot in
  /// [0, num_pilots) is unused or an index is out of range.
  PilotAssignment(std::vector<std::size_t> pilot_of, std::size_t num_pilots);

  std::size_t num_users() const { return pilot_of_.size(); }
  std::size_t num_pilots() const { return groups_.size(); }
  std::size_t pilot_of(std::size_t user) const { return pilot_of_[user]; }
  const std::vector<std::size_t>& group(std::size_t pilot) const { return groups_[pilot]; }
  const std::vector<std::size_t>& copilots(std::size_t user) const {
    return groups_[pilot_of_[user]];
  }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }

 private:
  std::vector<std::size_t> pilot_of_;
  std::vector<std::vector<std::size_t>> groups_;
};

/// Uniform i.i.d. pilot draw, redrawn as a whole until no group is empty.
PilotAssignment assign_pilots_random(std::size_t num_users, std::size_t tau, RngStream& rng);

struct ChannelRealization {
  Eigen::MatrixXcd h;  // small-scale, i.i.d. CN(0, 1)
  Eigen::MatrixXcd g;  // g_mk = sqrt(beta_mk) h_mk
};

Eigen::MatrixXcd draw_small_scale(std::size_t num_aps, std::size_t num_users, RngStream& rng);
ChannelRealization make_channel(const Eigen::MatrixXd& beta, Eigen::MatrixXcd h);

/// Large-scale channel statistics seen by the network controller after the
/// pilot phase. Noise variance is normalized to one; rho is the normalized
/// uplink SNR.
struct EstimationState {
  Eigen::MatrixXd beta;   // M x K
  Eigen::MatrixXd alpha;  // M x K, variance of the MMSE estimate
  Eigen::VectorXd d;      // diag of D = rho * sum_i eta_i C_i + I
  Eigen::VectorXd eta;    // K power coefficients
  double rho = 0.0;
  std::size_t tau = 1;

  std::size_t num_aps() const { return static_cast<std::size_t>(beta.rows()); }
  std::size_t num_users() const { return static_cast<std::size_t>(beta.cols()); }

  auto a(std::size_t i) const { return alpha.col(static_cast<Eigen::Index>(i)); }
  auto b(std::size_t i) const { return beta.col(static_cast<Eigen::Index>(i)); }
  Eigen::VectorXd c(std::size_t i) const { return b(i) - a(i); }

  /// Copy with new power coefficients (D is rebuilt).
  EstimationState with_eta(const Eigen::VectorXd& new_eta) const;
};

/// alpha_mk = rho tau beta_mk^2 / (1 + rho tau sum_{i in S_{b_k}} beta_mi), and D.
EstimationState alpha_coefficients(const Eigen::MatrixXd& beta, const PilotAssignment& pilots,
                                   double rho, const Eigen::VectorXd& eta);

/// Simulates the projected pilot observation per AP and pilot, then forms the
/// MMSE estimates. Users sharing a pilot get estimates that are exact
/// per-AP rescalings of one another.
Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& g, const Eigen::MatrixXd& beta,
                                   const PilotAssignment& pilots, double rho, RngStream& rng);

/// Physical link budget; converts to the normalized SNR used everywhere else.
struct NoiseModel {
  double bandwidth_hz = 20e6;
  double noise_figure_db = 9.0;
  double temperature_k = 290.0;
  double transmit_power_w = 0.2;

  static constexpr double kBoltzmann = 1.380649e-23;

  void validate() const;
  /// sigma_v^2 = T * kappa * B * NF in watts.
  double noise_variance_w() const;
  double normalized_rho() const { return transmit_power_w / noise_variance_w(); }
};

}  // namespace cellfree
