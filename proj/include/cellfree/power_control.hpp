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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cellfree/channel.hpp"

namespace cellfree {

/// Closed-form LSFD SINRs of all users as a function of the power vector.
/// Everything that does not depend on eta is precomputed.
class LsfdContext {
 public:
  LsfdContext(Eigen::MatrixXd beta, PilotAssignment pilots, double rho);

  std::size_t num_users() const { return pilots_.num_users(); }
  const PilotAssignment& pilots() const { return pilots_; }

  /// Optimal-combiner LSFD SINR of every user at power vector eta.
  Eigen::VectorXd sinr(const Eigen::VectorXd& eta) const;

 private:
  Eigen::MatrixXd beta_;
  PilotAssignment pilots_;
  double rho_;
  Eigen::MatrixXd gain_;  // c_mi
};

/// min_k log2(1 + SINR_k(eta)).
double min_rate(const Eigen::VectorXd& eta, const LsfdContext& ctx);

struct FeasibilityResult {
  bool feasible = false;
  bool converged = false;
  Eigen::VectorXd eta;
  std::size_t iterations = 0;
};

/// Checks whether every user can reach rate `target` with eta in (0, 1]^K
/// using the projected fixed-point update eta_k <- min(1, g eta_k / SINR_k),
/// g = 2^target - 1, started from eta = 1.
FeasibilityResult feasibility_probe(double target, const LsfdContext& ctx, double tol = 1e-9,
                                    std::size_t max_iter = 20000);

struct PowerAllocation {
  Eigen::VectorXd eta;
  double achieved_min_rate = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  /// Every (target rate, feasible) pair probed, in order.
  std::vector<std::pair<double, bool>> probes;
};

/// Max-min LSFD rate allocation by bisection on the common target rate.
PowerAllocation maxmin_bisection(const LsfdContext& ctx, double eps_rate = 1e-3,
                                 double tol = 1e-9);

}  // namespace cellfree
