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
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "cellfree/channel.hpp"
#include "cellfree/receivers.hpp"

namespace cellfree {

/// Large-scale description of the partial MMSE receiver of user k. Every
/// matrix involved is diagonal, so they are stored as length-M vectors.
struct DeInputs {
  std::size_t k = 0;
  const Eigen::MatrixXd* alpha = nullptr;  // A_i = diag(alpha.col(i)), not owned
  Eigen::VectorXd q;                       // Q for user k
  Eigen::VectorXd d;                       // D
  std::vector<std::size_t> members;        // I_k
  std::vector<std::size_t> copilots;       // S_{b_k}
  std::vector<std::size_t> others;         // I_k \ S_{b_k}
  double rho = 0.0;
  Eigen::VectorXd eta;

  Eigen::Index num_aps() const { return q.size(); }
  std::size_t num_users() const { return static_cast<std::size_t>(alpha->cols()); }
  auto a(std::size_t i) const { return alpha->col(static_cast<Eigen::Index>(i)); }
};

/// `est` must outlive the returned inputs (alpha is referenced, not copied).
DeInputs make_de_inputs(std::size_t k, const EstimationState& est, const PilotAssignment& pilots,
                        const PmmseIndexSet& iset);

struct DeOptions {
  double tol = 1e-9;  // relative change between sweeps
  std::size_t max_iter = 10000;
  std::optional<double> init;  // starting delta; defaults to M
};

/// Converged deltas over `indices` and the diagonal T they induce:
///   T = (rho/M sum_j eta_j A_j / (1 + delta_j) + Q/M)^{-1},
///   delta_i = rho eta_i / M tr(A_i T).
struct FixedPointResult {
  std::vector<std::size_t> indices;
  Eigen::VectorXd delta;
  Eigen::VectorXd t;
  std::size_t iterations = 0;
  double residual = 0.0;
};

FixedPointResult solve_fixed_point(const DeInputs& in, std::vector<std::size_t> indices,
                                   const DeOptions& opts = {});
/// Deltas over I_k \ S_{b_k}.
FixedPointResult fixed_point_deltas(const DeInputs& in, const DeOptions& opts = {});
/// Deltas over I_k \ {excluded}; the resulting `t` is T''_excluded.
FixedPointResult fixed_point_deltas_dprime(const DeInputs& in, std::size_t excluded,
                                           const DeOptions& opts = {});

/// Diagonal T evaluated at the given deltas.
Eigen::VectorXd t_from_deltas(const DeInputs& in, const std::vector<std::size_t>& indices,
                              const Eigen::VectorXd& delta);

struct TAndJ {
  Eigen::VectorXd t;
  Eigen::MatrixXd j;  // indexed like FixedPointResult::indices
};

/// [J]_jl = rho^2 eta_j eta_l tr(A_j T A_l T) / (M^2 (1 + delta_l)^2).
TAndJ compute_T_and_J(const DeInputs& in, const FixedPointResult& fp);

/// LU of I - J. Throws NumericalError when it is numerically singular.
Eigen::FullPivLU<Eigen::MatrixXd> factor_i_minus_j(const Eigen::MatrixXd& j);

/// delta' = (I - J)^{-1} [rho eta_j / M tr(A_j T H T)]_j.
Eigen::VectorXd solve_delta_prime(const DeInputs& in, const FixedPointResult& fp,
                                  const Eigen::FullPivLU<Eigen::MatrixXd>& i_minus_j,
                                  const Eigen::VectorXd& h);

/// T'(H) = T H T + T (rho/M sum_j eta_j A_j delta'_j / (1 + delta_j)^2) T.
Eigen::VectorXd compute_T_prime(const DeInputs& in, const FixedPointResult& fp,
                                const Eigen::VectorXd& delta_prime, const Eigen::VectorXd& h);

/// Co-pilot terms. Rows/columns follow DeInputs::copilots.
struct GroupTerms {
  Eigen::MatrixXd traces;  // tr(A_i^{1/2} A_j^{1/2} T), i, j in S_{b_k}
  Eigen::MatrixXd gamma;   // column c is gamma_{copilots[c]}
  Eigen::MatrixXd big_gamma;
  Eigen::VectorXd lambda;  // lambda_i for i in S_{b_k}
  Eigen::LLT<Eigen::MatrixXd> big_gamma_llt;
};

GroupTerms compute_group_terms(const DeInputs& in, const Eigen::VectorXd& t);

struct ThetaTerms {
  Eigen::VectorXd nu_k;  // nu_k(H)
  Eigen::MatrixXd n;     // N(H)
  double theta = 0.0;
};

/// nu_k(H), N(H) and theta(H) for a given T'(H).
ThetaTerms compute_theta(const DeInputs& in, const GroupTerms& group,
                         const Eigen::VectorXd& t_prime);

/// All quantities behind the large-scale approximation of one user's partial
/// MMSE SINR. Deltas, T, J and the I - J factorization are computed once;
/// theta(H) reuses them for every H.
class DeterministicEquivalent {
 public:
  explicit DeterministicEquivalent(DeInputs inputs, const DeOptions& opts = {});

  const DeInputs& inputs() const { return in_; }
  const FixedPointResult& deltas() const { return fp_; }
  const Eigen::MatrixXd& j() const { return j_; }
  const GroupTerms& group() const { return group_; }

  Eigen::VectorXd delta_prime(const Eigen::VectorXd& h) const;
  Eigen::VectorXd t_prime(const Eigen::VectorXd& h) const;
  ThetaTerms theta_terms(const Eigen::VectorXd& h) const;
  double theta(const Eigen::VectorXd& h) const { return theta_terms(h).theta; }
  double lambda(std::size_t user) const;

  /// rho eta_k lambda_k^2 / (theta(D) + coherent + outside + inside terms).
  double sinr() const;

 private:
  DeInputs in_;
  DeOptions opts_;
  FixedPointResult fp_;
  Eigen::MatrixXd j_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
  GroupTerms group_;
};

double de_sinr_pmmse(const DeInputs& in, const DeOptions& opts = {});

}  // namespace cellfree
