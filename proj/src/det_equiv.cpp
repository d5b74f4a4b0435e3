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

#include "cellfree/det_equiv.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <string>
#include <stdexcept>

#include "cellfree/errors.hpp"

namespace cellfree {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Smallest acceptable reciprocal condition number of I - J.
constexpr double kMinRcond = 1e-13;

double trace_sqrt(const DeInputs& in, std::size_t i, std::size_t j, const Eigen::VectorXd& x) {
  return ((in.a(i).array() * in.a(j).array()).sqrt() * x.array()).sum();
}

}  // namespace

DeInputs make_de_inputs(std::size_t k, const EstimationState& est, const PilotAssignment& pilots,
                        const PmmseIndexSet& iset) {
  DeInputs in;
  in.k = k;
  in.alpha = &est.alpha;
  in.q = pmmse_q(iset, est);
  in.d = est.d;
  in.members = iset.members;
  in.copilots = pilots.copilots(k);
  std::set_difference(in.members.begin(), in.members.end(), in.copilots.begin(),
                      in.copilots.end(), std::back_inserter(in.others));
  in.rho = est.rho;
  in.eta = est.eta;
  return in;
}

Eigen::VectorXd t_from_deltas(const DeInputs& in, const std::vector<std::size_t>& indices,
                              const Eigen::VectorXd& delta) {
  const double m = static_cast<double>(in.num_aps());
  Eigen::VectorXd inv = in.q / m;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const std::size_t j = indices[c];
    inv += (in.rho / m) * in.eta(idx(j)) / (1.0 + delta(idx(c))) * in.a(j);
  }
  return inv.cwiseInverse();
}

FixedPointResult solve_fixed_point(const DeInputs& in, std::vector<std::size_t> indices,
                                   const DeOptions& opts) {
  const double m = static_cast<double>(in.num_aps());
  FixedPointResult fp;
  fp.indices = std::move(indices);
  const auto n = idx(fp.indices.size());
  fp.delta = Eigen::VectorXd::Constant(n, opts.init.value_or(m));
  if (n == 0) {
    fp.t = t_from_deltas(in, fp.indices, fp.delta);
    return fp;
  }
  Eigen::VectorXd next(n);
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd t = t_from_deltas(in, fp.indices, fp.delta);
    double residual = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t i = fp.indices[idx(c)];
      next(c) = in.rho * in.eta(idx(i)) / m * in.a(i).dot(t);
      const double scale = std::max(std::abs(next(c)), std::numeric_limits<double>::min());
      residual = std::max(residual, std::abs(next(c) - fp.delta(c)) / scale);
    }
    fp.delta.swap(next);
    fp.iterations = it;
    fp.residual = residual;
    if (!fp.delta.allFinite()) break;
    if (residual <= opts.tol) {
      fp.t = t_from_deltas(in, fp.indices, fp.delta);
      return fp;
    }
  }
  throw ConvergenceError("deterministic-equivalent fixed point did not converge for user " +
                             std::to_string(in.k),
                         fp.iterations, fp.residual);
}

FixedPointResult fixed_point_deltas(const DeInputs& in, const DeOptions& opts) {
  return solve_fixed_point(in, in.others, opts);
}

FixedPointResult fixed_point_deltas_dprime(const DeInputs& in, std::size_t excluded,
                                           const DeOptions& opts) {
  std::vector<std::size_t> indices;
  std::copy_if(in.members.begin(), in.members.end(), std::back_inserter(indices),
               [excluded](std::size_t j) { return j != excluded; });
  return solve_fixed_point(in, std::move(indices), opts);
}

TAndJ compute_T_and_J(const DeInputs& in, const FixedPointResult& fp) {
  const double m = static_cast<double>(in.num_aps());
  TAndJ out;
  out.t = t_from_deltas(in, fp.indices, fp.delta);
  const auto n = idx(fp.indices.size());
  out.j.resize(n, n);
  const Eigen::ArrayXd t2 = out.t.array().square();
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t j = fp.indices[idx(r)];
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t l = fp.indices[idx(c)];
      const double tr = (in.a(j).array() * in.a(l).array() * t2).sum();
      out.j(r, c) = in.rho * in.rho * in.eta(idx(j)) * in.eta(idx(l)) * tr /
                    (m * m * std::pow(1.0 + fp.delta(c), 2));
    }
  }
  return out;
}

Eigen::FullPivLU<Eigen::MatrixXd> factor_i_minus_j(const Eigen::MatrixXd& j) {
  const Eigen::MatrixXd i_minus_j = Eigen::MatrixXd::Identity(j.rows(), j.cols()) - j;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_j);
  if (j.size() > 0 && (!lu.isInvertible() || lu.rcond() < kMinRcond)) {
    throw NumericalError("I - J is numerically singular");
  }
  return lu;
}

Eigen::VectorXd solve_delta_prime(const DeInputs& in, const FixedPointResult& fp,
                                  const Eigen::FullPivLU<Eigen::MatrixXd>& i_minus_j,
                                  const Eigen::VectorXd& h) {
  const double m = static_cast<double>(in.num_aps());
  const auto n = idx(fp.indices.size());
  if (n == 0) return Eigen::VectorXd(0);
  const Eigen::ArrayXd tht = fp.t.array().square() * h.array();
  Eigen::VectorXd rhs(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const std::size_t j = fp.indices[idx(c)];
    rhs(c) = in.rho * in.eta(idx(j)) / m * (in.a(j).array() * tht).sum();
  }
  return i_minus_j.solve(rhs);
}

Eigen::VectorXd compute_T_prime(const DeInputs& in, const FixedPointResult& fp,
                                const Eigen::VectorXd& delta_prime, const Eigen::VectorXd& h) {
  const double m = static_cast<double>(in.num_aps());
  Eigen::VectorXd inner = h;
  for (std::size_t c = 0; c < fp.indices.size(); ++c) {
    const std::size_t j = fp.indices[c];
    inner += (in.rho / m) * in.eta(idx(j)) * delta_prime(idx(c)) /
             std::pow(1.0 + fp.delta(idx(c)), 2) * in.a(j);
  }
  return fp.t.array().square() * inner.array();
}

GroupTerms compute_group_terms(const DeInputs& in, const Eigen::VectorXd& t) {
  const double m = static_cast<double>(in.num_aps());
  const auto s = idx(in.copilots.size());
  GroupTerms g;
  g.traces.resize(s, s);
  Eigen::VectorXd sqrt_eta(s);
  for (Eigen::Index r = 0; r < s; ++r) {
    sqrt_eta(r) = std::sqrt(in.eta(idx(in.copilots[idx(r)])));
    for (Eigen::Index c = 0; c <= r; ++c) {
      g.traces(r, c) = g.traces(c, r) =
          trace_sqrt(in, in.copilots[idx(r)], in.copilots[idx(c)], t);
    }
  }
  // gamma_i[j] = sqrt(rho)/M sqrt(eta_j) tr(A_i^{1/2} A_j^{1/2} T)
  g.gamma = (std::sqrt(in.rho) / m) * (sqrt_eta.asDiagonal() * g.traces);
  g.big_gamma = Eigen::MatrixXd::Identity(s, s) +
                (in.rho / m) * (sqrt_eta.asDiagonal() * g.traces * sqrt_eta.asDiagonal());
  g.big_gamma_llt.compute(g.big_gamma);
  if (g.big_gamma_llt.info() != Eigen::Success) {
    throw NumericalError("Gamma is not positive definite");
  }
  const Eigen::Index kc = idx(std::lower_bound(in.copilots.begin(), in.copilots.end(), in.k) -
                              in.copilots.begin());
  const Eigen::VectorXd y = g.big_gamma_llt.solve(g.gamma.col(kc));
  g.lambda.resize(s);
  for (Eigen::Index c = 0; c < s; ++c) {
    g.lambda(c) = g.traces(c, kc) / m - y.dot(g.gamma.col(c));
  }
  return g;
}

ThetaTerms compute_theta(const DeInputs& in, const GroupTerms& group,
                         const Eigen::VectorXd& t_prime) {
  const double m = static_cast<double>(in.num_aps());
  const auto s = idx(in.copilots.size());
  const Eigen::Index kc = idx(std::lower_bound(in.copilots.begin(), in.copilots.end(), in.k) -
                              in.copilots.begin());
  Eigen::MatrixXd traces(s, s);
  Eigen::VectorXd sqrt_eta(s);
  for (Eigen::Index r = 0; r < s; ++r) {
    sqrt_eta(r) = std::sqrt(in.eta(idx(in.copilots[idx(r)])));
    for (Eigen::Index c = 0; c <= r; ++c) {
      traces(r, c) = traces(c, r) =
          trace_sqrt(in, in.copilots[idx(r)], in.copilots[idx(c)], t_prime);
    }
  }
  ThetaTerms out;
  out.nu_k = (std::sqrt(in.rho) / (m * m)) * sqrt_eta.cwiseProduct(traces.col(kc));
  out.n = (in.rho / (m * m)) * (sqrt_eta.asDiagonal() * traces * sqrt_eta.asDiagonal());
  const Eigen::VectorXd y = group.big_gamma_llt.solve(group.gamma.col(kc));
  out.theta = traces(kc, kc) / (m * m) - 2.0 * out.nu_k.dot(y) + y.dot(out.n * y);
  return out;
}

DeterministicEquivalent::DeterministicEquivalent(DeInputs inputs, const DeOptions& opts)
    : in_(std::move(inputs)), opts_(opts) {
  if (in_.alpha == nullptr) throw std::invalid_argument("DeInputs without alpha");
  fp_ = fixed_point_deltas(in_, opts_);
  TAndJ tj = compute_T_and_J(in_, fp_);
  j_ = std::move(tj.j);
  lu_ = factor_i_minus_j(j_);
  group_ = compute_group_terms(in_, fp_.t);
}

Eigen::VectorXd DeterministicEquivalent::delta_prime(const Eigen::VectorXd& h) const {
  return solve_delta_prime(in_, fp_, lu_, h);
}

Eigen::VectorXd DeterministicEquivalent::t_prime(const Eigen::VectorXd& h) const {
  return compute_T_prime(in_, fp_, delta_prime(h), h);
}

ThetaTerms DeterministicEquivalent::theta_terms(const Eigen::VectorXd& h) const {
  return compute_theta(in_, group_, t_prime(h));
}

double DeterministicEquivalent::lambda(std::size_t user) const {
  const auto it = std::lower_bound(in_.copilots.begin(), in_.copilots.end(), user);
  if (it == in_.copilots.end() || *it != user) {
    throw std::invalid_argument("lambda is only defined for co-pilot users");
  }
  return group_.lambda(idx(it - in_.copilots.begin()));
}

double DeterministicEquivalent::sinr() const {
  const double m = static_cast<double>(in_.num_aps());
  const double rho = in_.rho;
  const double eta_k = in_.eta(idx(in_.k));
  if (eta_k == 0.0) return 0.0;

  double denom = theta(in_.d);
  for (auto i : in_.copilots) {
    if (i == in_.k) continue;
    denom += rho * in_.eta(idx(i)) * std::pow(lambda(i), 2);
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < in_.num_users(); ++i) {
    if (next < in_.members.size() && in_.members[next] == i) {
      ++next;
      continue;
    }
    if (in_.eta(idx(i)) == 0.0) continue;
    denom += rho * in_.eta(idx(i)) * theta(in_.a(i));
  }
  for (auto i : in_.others) {
    if (in_.eta(idx(i)) == 0.0) continue;
    const FixedPointResult dp = fixed_point_deltas_dprime(in_, i, opts_);
    const double shrink = 1.0 + rho * in_.eta(idx(i)) / m * in_.a(i).dot(dp.t);
    denom += rho * in_.eta(idx(i)) * theta(in_.a(i)) / (shrink * shrink);
  }
  const double lk = lambda(in_.k);
  return rho * eta_k * lk * lk / denom;
}

double de_sinr_pmmse(const DeInputs& in, const DeOptions& opts) {
  return DeterministicEquivalent(in, opts).sinr();
}

}  // namespace cellfree
