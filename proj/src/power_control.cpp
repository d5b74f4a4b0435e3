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

#include "cellfree/power_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellfree/receivers.hpp"

namespace cellfree {

LsfdContext::LsfdContext(Eigen::MatrixXd beta, PilotAssignment pilots, double rho)
    : beta_(std::move(beta)), pilots_(std::move(pilots)), rho_(rho) {
  gain_ = pilot_gain_coefficients(beta_, pilots_, rho_);
}

Eigen::VectorXd LsfdContext::sinr(const Eigen::VectorXd& eta) const {
  const Eigen::VectorXd beta_eta = beta_ * eta;
  Eigen::VectorXd out(eta.size());
  for (std::size_t k = 0; k < num_users(); ++k) {
    const auto stats = lsfd_statistics(k, beta_, gain_, pilots_, rho_, beta_eta);
    out(static_cast<Eigen::Index>(k)) = lsfd_combiner_and_sinr(stats, eta).sinr;
  }
  return out;
}

double min_rate(const Eigen::VectorXd& eta, const LsfdContext& ctx) {
  return std::log2(1.0 + ctx.sinr(eta).minCoeff());
}

FeasibilityResult feasibility_probe(double target, const LsfdContext& ctx, double tol,
                                    std::size_t max_iter) {
  if (!(target >= 0.0)) throw std::invalid_argument("feasibility_probe: target must be >= 0");
  const auto k = static_cast<Eigen::Index>(ctx.num_users());
  FeasibilityResult out;
  out.eta = Eigen::VectorXd::Ones(k);
  const double goal = std::exp2(target) - 1.0;
  if (goal <= 0.0) {
    out.feasible = out.converged = true;
    return out;
  }
  Eigen::VectorXd sinr = ctx.sinr(out.eta);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd next(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      next(i) = sinr(i) > 0.0 ? std::min(1.0, goal * out.eta(i) / sinr(i)) : 1.0;
    }
    const double change = ((next - out.eta).cwiseAbs().array() / next.array()).maxCoeff();
    out.eta.swap(next);
    out.iterations = it;
    sinr = ctx.sinr(out.eta);
    if (change <= tol) {
      out.converged = true;
      break;
    }
  }
  // A saturated user (eta = 1) still short of the goal means infeasible.
  out.feasible = (sinr.array() >= goal * (1.0 - 1e-6)).all();
  return out;
}

PowerAllocation maxmin_bisection(const LsfdContext& ctx, double eps_rate, double tol) {
  if (!(eps_rate > 0.0)) throw std::invalid_argument("maxmin_bisection: eps_rate must be > 0");
  const auto k = static_cast<Eigen::Index>(ctx.num_users());

  PowerAllocation out;
  out.eta = Eigen::VectorXd::Ones(k);
  out.achieved_min_rate = min_rate(out.eta, ctx);
  out.converged = true;

  double lo = out.achieved_min_rate;
  double single_best = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd solo = Eigen::VectorXd::Zero(k);
    solo(i) = 1.0;
    single_best = std::max(single_best, ctx.sinr(solo)(i));
  }
  double hi = std::log2(1.0 + single_best);

  while (hi - lo > eps_rate) {
    const double mid = 0.5 * (lo + hi);
    const FeasibilityResult probe = feasibility_probe(mid, ctx, tol);
    out.probes.emplace_back(mid, probe.feasible);
    ++out.iterations;
    out.converged = out.converged && probe.converged;
    if (probe.feasible) {
      lo = mid;
      const double rate = min_rate(probe.eta, ctx);
      if (rate > out.achieved_min_rate) {
        out.achieved_min_rate = rate;
        out.eta = probe.eta;
      }
    } else {
      hi = mid;
    }
  }
  return out;
}

}  // namespace cellfree
