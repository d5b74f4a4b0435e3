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

#include "cellfree/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cellfree/errors.hpp"

namespace cellfree {

PilotAssignment::PilotAssignment(std::vector<std::size_t> pilot_of, std::size_t num_pilots)
    : pilot_of_(std::move(pilot_of)), groups_(num_pilots) {
  for (std::size_t k = 0; k < pilot_of_.size(); ++k) {
    if (pilot_of_[k] >= num_pilots) {
      throw std::invalid_argument("pilot index out of range for user " + std::to_string(k));
    }
    groups_[pilot_of_[k]].push_back(k);
  }
  for (std::size_t j = 0; j < num_pilots; ++j) {
    if (groups_[j].empty()) {
      throw std::invalid_argument("pilot group " + std::to_string(j) + " is empty");
    }
  }
}

PilotAssignment assign_pilots_random(std::size_t num_users, std::size_t tau, RngStream& rng) {
  if (tau == 0) throw ConfigError("tau", "must be >= 1");
  if (tau > num_users) throw ConfigError("tau", "must not exceed K");
  std::vector<std::size_t> pilot_of(num_users);
  std::vector<std::size_t> counts(tau);
  while (true) {
    std::fill(counts.begin(), counts.end(), 0);
    for (auto& p : pilot_of) {
      p = rng.uniform_index(tau);
      ++counts[p];
    }
    if (std::find(counts.begin(), counts.end(), 0) == counts.end()) break;
  }
  return PilotAssignment(std::move(pilot_of), tau);
}

Eigen::MatrixXcd draw_small_scale(std::size_t num_aps, std::size_t num_users, RngStream& rng) {
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(num_aps), static_cast<Eigen::Index>(num_users));
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    for (Eigen::Index m = 0; m < h.rows(); ++m) h(m, k) = rng.complex_normal();
  }
  return h;
}

ChannelRealization make_channel(const Eigen::MatrixXd& beta, Eigen::MatrixXcd h) {
  ChannelRealization out;
  out.g = beta.array().sqrt().cast<std::complex<double>>() * h.array();
  out.h = std::move(h);
  return out;
}

EstimationState EstimationState::with_eta(const Eigen::VectorXd& new_eta) const {
  EstimationState out = *this;
  out.eta = new_eta;
  out.d = (rho * ((beta - alpha) * new_eta)).array() + 1.0;
  return out;
}

EstimationState alpha_coefficients(const Eigen::MatrixXd& beta, const PilotAssignment& pilots,
                                   double rho, const Eigen::VectorXd& eta) {
  if (!(rho > 0.0)) throw ConfigError("rho", "must be > 0");
  if (static_cast<std::size_t>(beta.cols()) != pilots.num_users() ||
      eta.size() != beta.cols()) {
    throw std::invalid_argument("alpha_coefficients: inconsistent user counts");
  }
  const double rt = rho * static_cast<double>(pilots.num_pilots());
  EstimationState est;
  est.beta = beta;
  est.alpha.resize(beta.rows(), beta.cols());
  est.rho = rho;
  est.tau = pilots.num_pilots();
  for (const auto& group : pilots.groups()) {
    Eigen::VectorXd denom = Eigen::VectorXd::Ones(beta.rows());
    for (auto i : group) denom += rt * beta.col(static_cast<Eigen::Index>(i));
    for (auto k : group) {
      const auto col = static_cast<Eigen::Index>(k);
      est.alpha.col(col) = rt * beta.col(col).array().square() / denom.array();
    }
  }
  return est.with_eta(eta);
}

Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& g, const Eigen::MatrixXd& beta,
                                   const PilotAssignment& pilots, double rho, RngStream& rng) {
  const Eigen::Index m = g.rows();
  const double rt = rho * static_cast<double>(pilots.num_pilots());
  const double sqrt_rt = std::sqrt(rt);
  Eigen::MatrixXcd ghat(m, g.cols());
  for (const auto& group : pilots.groups()) {
    // psi_j^H y_m = sqrt(rho tau) sum_{i in S_j} g_mi + n_mj, one n per (AP, pilot).
    Eigen::VectorXcd obs(m);
    for (Eigen::Index r = 0; r < m; ++r) obs(r) = rng.complex_normal();
    Eigen::VectorXd denom = Eigen::VectorXd::Ones(m);
    for (auto i : group) {
      const auto col = static_cast<Eigen::Index>(i);
      obs += sqrt_rt * g.col(col);
      denom += rt * beta.col(col);
    }
    for (auto k : group) {
      const auto col = static_cast<Eigen::Index>(k);
      ghat.col(col) = (sqrt_rt * beta.col(col).array() / denom.array())
                          .cast<std::complex<double>>() *
                      obs.array();
    }
  }
  return ghat;
}

void NoiseModel::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("noise.bandwidth", "must be > 0");
  if (!(temperature_k > 0.0)) throw ConfigError("noise.temperature_k", "must be > 0");
  if (!(transmit_power_w > 0.0)) throw ConfigError("noise.transmit_power", "must be > 0");
  if (!std::isfinite(noise_figure_db)) throw ConfigError("noise.noise_figure", "must be finite");
}

double NoiseModel::noise_variance_w() const {
  return temperature_k * kBoltzmann * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
}

}  // namespace cellfree
