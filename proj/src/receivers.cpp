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

#include "cellfree/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cellfree/errors.hpp"

namespace cellfree {

namespace {

using cd = std::complex<double>;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t position_in(const std::vector<std::size_t>& sorted, std::size_t value) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  if (it == sorted.end() || *it != value) {
    throw std::invalid_argument("user is not a member of the index set");
  }
  return static_cast<std::size_t>(it - sorted.begin());
}

Combiner member_combiner(const DiagonalPlusLowRank<cd>& solver, std::size_t pos, std::size_t k,
                         const Eigen::MatrixXcd& ghat, const EstimationState& est,
                         CombinerKind kind) {
  Combiner out;
  out.kind = kind;
  if (est.eta(idx(k)) > 0.0) {
    out.v = solver.solve_column(idx(pos));
  } else {
    // Zero power: keep the direction so the combiner stays nonzero.
    out.v = solver.solve(ghat.col(idx(k)));
  }
  return out;
}

}  // namespace

double instantaneous_sinr(const Eigen::VectorXcd& v, std::size_t k, const Eigen::MatrixXcd& ghat,
                          const EstimationState& est) {
  const Eigen::VectorXcd proj = ghat.adjoint() * v;  // g_i^H v
  double interference = 0.0;
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    if (i == idx(k)) continue;
    interference += est.eta(i) * std::norm(proj(i));
  }
  const double noise = (est.d.array() * v.array().abs2()).sum();
  const double denom = est.rho * interference + noise;
  if (!(denom > 0.0)) throw NumericalError("zero combiner passed to instantaneous_sinr");
  return est.rho * est.eta(idx(k)) * std::norm(proj(idx(k))) / denom;
}

DiagonalPlusLowRank<cd> estimate_covariance(const Eigen::VectorXd& q, const Eigen::MatrixXcd& ghat,
                                            const EstimationState& est,
                                            const std::vector<std::size_t>& members) {
  Eigen::MatrixXcd u(ghat.rows(), idx(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    u.col(idx(j)) = std::sqrt(est.rho * est.eta(idx(members[j]))) * ghat.col(idx(members[j]));
  }
  return DiagonalPlusLowRank<cd>(q, std::move(u));
}

namespace {

std::vector<std::size_t> all_users(std::size_t k) {
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = i;
  return out;
}

}  // namespace

MmseReceiver::MmseReceiver(const Eigen::MatrixXcd& ghat, const EstimationState& est)
    : ghat_(ghat),
      est_(est),
      solver_(estimate_covariance(est.d, ghat, est, all_users(est.num_users()))) {}

Combiner MmseReceiver::combiner(std::size_t k) const {
  return member_combiner(solver_, k, k, ghat_, est_, CombinerKind::kMMSE);
}

double MmseReceiver::quadratic_form(std::size_t k) const {
  const double w = est_.rho * est_.eta(idx(k));
  if (w <= 0.0) return ghat_.col(idx(k)).dot(solver_.solve(ghat_.col(idx(k)))).real();
  return ghat_.col(idx(k)).dot(solver_.solve_column(idx(k))).real() / std::sqrt(w);
}

double MmseReceiver::sinr(std::size_t k) const {
  const double w = est_.rho * est_.eta(idx(k));
  if (w <= 0.0) return 0.0;
  const double x = quadratic_form(k);
  const double denom = 1.0 / w - x;
  if (!(denom > 0.0) || !std::isfinite(x)) {
    throw NumericalError("MMSE closed-form SINR lost precision (1/(rho eta) - x <= 0)");
  }
  return x / denom;
}

Combiner mmse_combiner(std::size_t k, const Eigen::MatrixXcd& ghat, const EstimationState& est) {
  return MmseReceiver(ghat, est).combiner(k);
}

double mmse_sinr_closed_form(std::size_t k, const Eigen::MatrixXcd& ghat,
                             const EstimationState& est) {
  return MmseReceiver(ghat, est).sinr(k);
}

PmmseIndexSet make_index_set(std::size_t k, const PilotAssignment& pilots,
                             std::vector<std::size_t> neighbors) {
  PmmseIndexSet out;
  out.members = pilots.copilots(k);
  out.members.insert(out.members.end(), neighbors.begin(), neighbors.end());
  std::sort(out.members.begin(), out.members.end());
  out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
  out.neighbors = std::move(neighbors);
  return out;
}

PmmseIndexSet pmmse_index_set(std::size_t k, const Eigen::MatrixXd& beta,
                              const PilotAssignment& pilots) {
  const Eigen::VectorXd score = beta.transpose() * beta.col(idx(k));
  std::vector<std::size_t> neighbors(pilots.num_pilots());
  for (std::size_t j = 0; j < pilots.num_pilots(); ++j) {
    const auto& group = pilots.group(j);
    std::size_t best = group.front();
    for (auto i : group) {
      if (score(idx(i)) > score(idx(best))) best = i;
    }
    neighbors[j] = best;
  }
  return make_index_set(k, pilots, std::move(neighbors));
}

PmmseIndexSet pmmse_index_set_random(std::size_t k, const PilotAssignment& pilots,
                                     RngStream& rng) {
  std::vector<std::size_t> neighbors(pilots.num_pilots());
  for (std::size_t j = 0; j < pilots.num_pilots(); ++j) {
    const auto& group = pilots.group(j);
    neighbors[j] = group[rng.uniform_index(group.size())];
  }
  return make_index_set(k, pilots, std::move(neighbors));
}

Eigen::VectorXd pmmse_q(const PmmseIndexSet& iset, const EstimationState& est) {
  Eigen::VectorXd q = est.d;
  std::size_t next = 0;
  for (std::size_t i = 0; i < est.num_users(); ++i) {
    if (next < iset.members.size() && iset.members[next] == i) {
      ++next;
      continue;
    }
    q += (est.rho * est.eta(idx(i))) * est.a(i);
  }
  return q;
}

Combiner pmmse_combiner(std::size_t k, const Eigen::MatrixXcd& ghat, const EstimationState& est,
                        const PmmseIndexSet& iset) {
  const auto solver = estimate_covariance(pmmse_q(iset, est), ghat, est, iset.members);
  return member_combiner(solver, position_in(iset.members, k), k, ghat, est,
                         CombinerKind::kPMMSE);
}

Eigen::MatrixXd pilot_gain_coefficients(const Eigen::MatrixXd& beta,
                                        const PilotAssignment& pilots, double rho) {
  const double rt = rho * static_cast<double>(pilots.num_pilots());
  Eigen::MatrixXd c(beta.rows(), beta.cols());
  for (const auto& group : pilots.groups()) {
    Eigen::VectorXd denom = Eigen::VectorXd::Ones(beta.rows());
    for (auto i : group) denom += rt * beta.col(idx(i));
    for (auto i : group) c.col(idx(i)) = rt * beta.col(idx(i)).array() / denom.array();
  }
  return c;
}

Eigen::Index LsfdStatistics::column_of(std::size_t user) const {
  return idx(position_in(copilots, user));
}

LsfdStatistics lsfd_statistics(std::size_t k, const Eigen::MatrixXd& beta,
                               const Eigen::MatrixXd& gain, const PilotAssignment& pilots,
                               double rho, const Eigen::VectorXd& beta_eta) {
  LsfdStatistics s;
  s.k = k;
  s.rho = rho;
  s.copilots = pilots.copilots(k);
  s.mu.resize(beta.rows(), idx(s.copilots.size()));
  const auto beta_k = beta.col(idx(k)).array();
  for (std::size_t j = 0; j < s.copilots.size(); ++j) {
    s.mu.col(idx(j)) = beta_k * gain.col(idx(s.copilots[j])).array();
  }
  // alpha_mk = beta_mk c_mk, so mu_k doubles as alpha_k.
  const Eigen::ArrayXd alpha_k = s.mu.col(s.column_of(k)).array();
  s.lambda = alpha_k * (rho * beta_eta.array() + 1.0);
  return s;
}

LsfdStatistics lsfd_statistics(std::size_t k, const Eigen::MatrixXd& beta,
                               const PilotAssignment& pilots, const EstimationState& est) {
  const Eigen::MatrixXd gain = pilot_gain_coefficients(beta, pilots, est.rho);
  LsfdStatistics s = lsfd_statistics(k, beta, gain, pilots, est.rho, beta * est.eta);
  // Use the estimator's alpha verbatim for mu_k.
  s.mu.col(s.column_of(k)) = est.a(k);
  return s;
}

double lsfd_sinr(const LsfdStatistics& stats, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& eta) {
  double coherent = 0.0;
  double signal = 0.0;
  for (std::size_t j = 0; j < stats.copilots.size(); ++j) {
    const std::size_t i = stats.copilots[j];
    const double p = v.dot(stats.mu.col(idx(j)));
    if (i == stats.k) {
      signal = stats.rho * eta(idx(i)) * p * p;
    } else {
      coherent += eta(idx(i)) * p * p;
    }
  }
  const double denom = stats.rho * coherent + (stats.lambda.array() * v.array().square()).sum();
  if (!(denom > 0.0)) throw NumericalError("zero combiner passed to lsfd_sinr");
  return signal / denom;
}

LsfdResult lsfd_combiner_and_sinr(const LsfdStatistics& stats, const Eigen::VectorXd& eta) {
  const auto others = static_cast<Eigen::Index>(stats.copilots.size()) - 1;
  Eigen::MatrixXd u(stats.mu.rows(), others);
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < stats.copilots.size(); ++j) {
    const std::size_t i = stats.copilots[j];
    if (i == stats.k) continue;
    u.col(col++) = std::sqrt(stats.rho * eta(idx(i))) * stats.mu.col(idx(j));
  }
  const DiagonalPlusLowRank<double> system(stats.lambda, std::move(u));
  const Eigen::VectorXd mu_k = stats.mu.col(stats.column_of(stats.k));
  LsfdResult out;
  out.v = system.solve(mu_k);
  out.sinr = stats.rho * eta(idx(stats.k)) * mu_k.dot(out.v);
  return out;
}

Eigen::VectorXd mf_weights(Eigen::Index num_aps, MfCombinerMode mode) {
  if (mode == MfCombinerMode::kAllOnes) return Eigen::VectorXd::Ones(num_aps);
  return Eigen::VectorXd::LinSpaced(num_aps, 1.0, static_cast<double>(num_aps));
}

double mf_sinr_lsfd_frame(const LsfdStatistics& stats, const Eigen::VectorXd& eta,
                          MfCombinerMode mode) {
  return lsfd_sinr(stats, mf_weights(stats.mu.rows(), mode), eta);
}

double mf_asymptotic_sinr(std::size_t k, const PilotAssignment& pilots,
                          const MfAsymptoticInputs& in, RngStream& rng) {
  const auto& group = pilots.copilots(k);
  if (group.size() == 1) return std::numeric_limits<double>::infinity();
  if (in.n_samples == 0) throw std::invalid_argument("mf_asymptotic_sinr: n_samples must be > 0");

  const double rt = in.rho * static_cast<double>(pilots.num_pilots());
  const std::size_t n = group.size();
  const std::size_t self = position_in(group, k);
  std::vector<double> beta(n);
  std::vector<double> sums(n, 0.0);
  for (std::size_t s = 0; s < in.n_samples; ++s) {
    const Point ap{in.area.side_km * rng.uniform(), in.area.side_km * rng.uniform()};
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = std::pow(10.0, in.sigma_shad_db * rng.normal() / 10.0);
      beta[j] = path_loss(toroidal_distance(ap, in.users[group[j]], in.area), in.path_loss, z);
      denom += rt * beta[j];
    }
    for (std::size_t j = 0; j < n; ++j) sums[j] += beta[self] * rt * beta[j] / denom;
  }
  const double ns = static_cast<double>(in.n_samples);
  const double num = in.eta(idx(k)) * std::pow(sums[self] / ns, 2);
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == self) continue;
    den += in.eta(idx(group[j])) * std::pow(sums[j] / ns, 2);
  }
  return num / den;
}

}  // namespace cellfree
