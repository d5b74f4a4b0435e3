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
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cellfree/channel.hpp"
#include "cellfree/low_rank.hpp"
#include "cellfree/network_model.hpp"

namespace cellfree {

enum class CombinerKind { kMF, kMMSE, kPMMSE, kLSFD };

struct Combiner {
  Eigen::VectorXcd v;
  CombinerKind kind = CombinerKind::kMMSE;
};

/// SINR of user k for combiner v under worst-case uncorrelated noise:
///   rho eta_k |v^H g_k|^2 / (v^H (rho sum_{i != k} eta_i g_i g_i^H + D) v).
double instantaneous_sinr(const Eigen::VectorXcd& v, std::size_t k, const Eigen::MatrixXcd& ghat,
                          const EstimationState& est);

/// rho eta_i weighted columns of ghat restricted to `members`, on top of
/// diagonal q. Shared by the MMSE and partial MMSE receivers.
DiagonalPlusLowRank<std::complex<double>> estimate_covariance(
    const Eigen::VectorXd& q, const Eigen::MatrixXcd& ghat, const EstimationState& est,
    const std::vector<std::size_t>& members);

/// MMSE receiver for one channel realization. The matrix
/// rho sum_i eta_i g_i g_i^H + D is factorized once and shared by all users.
/// `ghat` and `est` must outlive the receiver.
class MmseReceiver {
 public:
  MmseReceiver(const Eigen::MatrixXcd& ghat, const EstimationState& est);

  /// v_k = sqrt(rho eta_k) (rho sum_i eta_i g_i g_i^H + D)^{-1} g_k.
  Combiner combiner(std::size_t k) const;
  /// x_k = g_k^H (rho sum_i eta_i g_i g_i^H + D)^{-1} g_k.
  double quadratic_form(std::size_t k) const;
  /// Closed-form SINR x / (1 / (rho eta_k) - x). Throws NumericalError when
  /// the denominator is not positive.
  double sinr(std::size_t k) const;

 private:
  const Eigen::MatrixXcd& ghat_;
  const EstimationState& est_;
  DiagonalPlusLowRank<std::complex<double>> solver_;
};

Combiner mmse_combiner(std::size_t k, const Eigen::MatrixXcd& ghat, const EstimationState& est);
double mmse_sinr_closed_form(std::size_t k, const Eigen::MatrixXcd& ghat,
                             const EstimationState& est);

/// I_k = S_{b_k} together with one selected user u_j from every pilot group.
struct PmmseIndexSet {
  std::vector<std::size_t> members;    // increasing
  std::vector<std::size_t> neighbors;  // u_j for j = 0..tau-1
};

/// Selects u_j = argmax_{i in S_j} beta_k^T beta_i, ties to the lowest index.
PmmseIndexSet pmmse_index_set(std::size_t k, const Eigen::MatrixXd& beta,
                              const PilotAssignment& pilots);
/// Selects u_j uniformly at random in S_j.
PmmseIndexSet pmmse_index_set_random(std::size_t k, const PilotAssignment& pilots,
                                     RngStream& rng);
PmmseIndexSet make_index_set(std::size_t k, const PilotAssignment& pilots,
                             std::vector<std::size_t> neighbors);

/// Q = rho sum_{i not in I_k} eta_i B_i + rho sum_{i in I_k} eta_i C_i + I,
/// evaluated as D + rho sum_{i not in I_k} eta_i A_i.
Eigen::VectorXd pmmse_q(const PmmseIndexSet& iset, const EstimationState& est);

/// v = sqrt(rho eta_k) (rho sum_{i in I_k} eta_i g_i g_i^H + Q)^{-1} g_k.
Combiner pmmse_combiner(std::size_t k, const Eigen::MatrixXcd& ghat, const EstimationState& est,
                        const PmmseIndexSet& iset);

/// c_mi = rho tau beta_mi / (1 + rho tau sum_{j in S_{b_i}} beta_mj). Note
/// alpha_mi = beta_mi c_mi.
Eigen::MatrixXd pilot_gain_coefficients(const Eigen::MatrixXd& beta,
                                        const PilotAssignment& pilots, double rho);

/// Large-scale statistics of the LSFD receiver for target user k.
struct LsfdStatistics {
  std::size_t k = 0;
  double rho = 0.0;
  std::vector<std::size_t> copilots;  // S_{b_k}, increasing, includes k
  Eigen::MatrixXd mu;                 // M x |S_{b_k}|, column j is mu_{copilots[j]}
  Eigen::VectorXd lambda;             // diag of Lambda

  Eigen::Index column_of(std::size_t user) const;
};

/// Builds mu_i and Lambda. `beta_eta` is beta * eta (the per-AP received
/// power sum), shared across users.
LsfdStatistics lsfd_statistics(std::size_t k, const Eigen::MatrixXd& beta,
                               const Eigen::MatrixXd& gain, const PilotAssignment& pilots,
                               double rho, const Eigen::VectorXd& beta_eta);
LsfdStatistics lsfd_statistics(std::size_t k, const Eigen::MatrixXd& beta,
                               const PilotAssignment& pilots, const EstimationState& est);

/// LSFD SINR for an arbitrary real combiner v.
double lsfd_sinr(const LsfdStatistics& stats, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& eta);

struct LsfdResult {
  Eigen::VectorXd v;
  double sinr = 0.0;
};

/// Optimal LSFD combiner (rho sum_{i in S_{b_k} \ k} eta_i mu_i mu_i^T + Lambda)^{-1} mu_k
/// and its SINR rho eta_k mu_k^T (...)^{-1} mu_k.
LsfdResult lsfd_combiner_and_sinr(const LsfdStatistics& stats, const Eigen::VectorXd& eta);

/// How the matched-filter combiner in the large-scale frame is read.
/// kAllOnes: unit weight on every per-AP matched-filter statistic.
/// kIndexRamp: the literal weights [1, 2, ..., M], kept for audit only.
enum class MfCombinerMode { kAllOnes, kIndexRamp };

Eigen::VectorXd mf_weights(Eigen::Index num_aps, MfCombinerMode mode);

/// Matched-filter SINR: lsfd_sinr at the MF weights.
double mf_sinr_lsfd_frame(const LsfdStatistics& stats, const Eigen::VectorXd& eta,
                          MfCombinerMode mode = MfCombinerMode::kAllOnes);

struct MfAsymptoticInputs {
  std::vector<Point> users;
  AreaConfig area;
  PathLossParams path_loss;
  double sigma_shad_db = 8.0;  // independent log-normal shadowing
  double rho = 1.0;
  Eigen::VectorXd eta;
  std::size_t n_samples = 1000000;
};

/// Limit of the MF SINR as M grows with i.i.d. uniformly placed APs:
///   eta_k E[beta_mk c_mk]^2 / sum_{i in S_{b_k} \ k} eta_i E[beta_mk c_mi]^2,
/// expectations estimated over n_samples AP draws. Returns +infinity when
/// user k has no co-pilot users.
double mf_asymptotic_sinr(std::size_t k, const PilotAssignment& pilots,
                          const MfAsymptoticInputs& in, RngStream& rng);

}  // namespace cellfree
