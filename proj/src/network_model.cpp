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

#include "cellfree/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cellfree/errors.hpp"

namespace cellfree {

namespace {

// Relative diagonal jitter applied to a singular correlation matrix.
constexpr double kCorrelationJitter = 1e-10;

}  // namespace

void AreaConfig::validate() const {
  if (!(side_km > 0.0) || !std::isfinite(side_km)) {
    throw ConfigError("area.side_km", "must be positive and finite");
  }
}

void ShadowingParams::validate() const {
  if (!(sigma_db >= 0.0)) throw ConfigError("shadowing.sigma", "must be >= 0");
  if (!(split_delta >= 0.0 && split_delta <= 1.0)) {
    throw ConfigError("shadowing.delta", "must lie in [0, 1]");
  }
  if (!(d_decorr_km > 0.0)) throw ConfigError("shadowing.decorrelation_km", "must be > 0");
  if (!(correlation_base > 1.0)) {
    throw ConfigError("shadowing.correlation_base", "must be > 1");
  }
}

PathLossParams PathLossParams::cost231(double f_mhz, double h_b_m, double h_r_m) {
  PathLossParams p;
  p.f_mhz = f_mhz;
  p.h_b_m = h_b_m;
  p.h_r_m = h_r_m;
  p.c2 = cost231_constant(f_mhz, h_b_m, h_r_m);
  p.c1 = p.c2 / std::pow(p.d1_km, p.far_exponent - p.near_exponent);
  p.c0 = p.c1 / std::pow(p.d0_km, p.near_exponent);
  return p;
}

Layout generate_layout(std::size_t num_aps, std::size_t num_users, const AreaConfig& area,
                       RngStream& rng) {
  area.validate();
  if (num_aps == 0) throw ConfigError("M", "must be >= 1");
  if (num_users == 0) throw ConfigError("K", "must be >= 1");
  auto draw = [&](std::size_t n) {
    std::vector<Point> pts(n);
    for (auto& p : pts) {
      p.x = area.side_km * rng.uniform();
      p.y = area.side_km * rng.uniform();
    }
    return pts;
  };
  Layout layout;
  layout.aps = draw(num_aps);
  layout.users = draw(num_users);
  return layout;
}

double toroidal_distance(const Point& p, const Point& q, double side_km) {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  dx = std::min(dx, side_km - dx);
  dy = std::min(dy, side_km - dy);
  return std::hypot(dx, dy);
}

double toroidal_distance(const Point& p, const Point& q, const AreaConfig& area) {
  if (area.wrap) return toroidal_distance(p, q, area.side_km);
  return std::hypot(p.x - q.x, p.y - q.y);
}

double cost231_constant_db(double f_mhz, double h_b_m, double h_r_m) {
  const double lf = std::log10(f_mhz);
  return -46.3 - 33.9 * lf + 13.82 * std::log10(h_b_m) + (1.1 * lf - 0.7) * h_r_m -
         (1.56 * lf - 0.8);
}

double cost231_constant(double f_mhz, double h_b_m, double h_r_m) {
  return std::pow(10.0, cost231_constant_db(f_mhz, h_b_m, h_r_m) / 10.0);
}

double path_loss(double d_km, const PathLossParams& params, double z) {
  if (d_km <= params.d0_km) return params.c0;
  if (d_km <= params.d1_km) return params.c1 / std::pow(d_km, params.near_exponent);
  return params.c2 * z / std::pow(d_km, params.far_exponent);
}

Eigen::MatrixXd shadowing_correlation(const std::vector<Point>& points, const AreaConfig& area,
                                      const ShadowingParams& params) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd corr(n, n);
  const double log_base = std::log(params.correlation_base);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = toroidal_distance(points[i], points[j], area);
      corr(i, j) = corr(j, i) = std::exp(-log_base * d / params.d_decorr_km);
    }
  }
  return corr;
}

Eigen::VectorXd sample_correlated_gaussian(const Eigen::MatrixXd& corr, double sigma,
                                           RngStream& rng) {
  const Eigen::Index n = corr.rows();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.normal();
  if (sigma == 0.0) return Eigen::VectorXd::Zero(n);

  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = corr;
    jittered.diagonal().array() += kCorrelationJitter;
    llt.compute(jittered);
  }
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXd lw = llt.matrixL() * w;
    return sigma * lw;
  }
  // The wrapped distance does not guarantee a positive semidefinite kernel;
  // clip the (tiny) negative spectrum as a last resort.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("shadowing covariance factorization failed");
  }
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return sigma * (eig.eigenvectors() * root.asDiagonal() * w);
}

Eigen::MatrixXd correlated_shadowing(const Layout& layout, const AreaConfig& area,
                                     const ShadowingParams& params, RngStream& rng) {
  params.validate();
  const auto m = static_cast<Eigen::Index>(layout.num_aps());
  const auto k = static_cast<Eigen::Index>(layout.num_users());
  Eigen::MatrixXd shadow_db(m, k);

  if (params.independent) {
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) shadow_db(i, j) = params.sigma_db * rng.normal();
    }
  } else {
    const Eigen::VectorXd a =
        sample_correlated_gaussian(shadowing_correlation(layout.aps, area, params),
                                   params.sigma_db, rng);
    const Eigen::VectorXd b =
        sample_correlated_gaussian(shadowing_correlation(layout.users, area, params),
                                   params.sigma_db, rng);
    const double wa = std::sqrt(params.split_delta);
    const double wb = std::sqrt(1.0 - params.split_delta);
    shadow_db = (wa * a).replicate(1, k) + (wb * b).transpose().replicate(m, 1);
  }
  return shadow_db.unaryExpr([](double x) { return std::pow(10.0, x / 10.0); });
}

Eigen::MatrixXd path_gain_matrix(const Layout& layout, const AreaConfig& area,
                                 const PathLossParams& pl, const Eigen::MatrixXd& z) {
  const auto m = static_cast<Eigen::Index>(layout.num_aps());
  const auto k = static_cast<Eigen::Index>(layout.num_users());
  Eigen::MatrixXd beta(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      beta(i, j) = path_loss(toroidal_distance(layout.aps[i], layout.users[j], area), pl, z(i, j));
    }
  }
  return beta;
}

LargeScaleFading large_scale_fading(const Layout& layout, const AreaConfig& area,
                                    const PathLossParams& pl, const ShadowingParams& sh,
                                    RngStream& rng) {
  LargeScaleFading out;
  out.z = correlated_shadowing(layout, area, sh, rng);
  out.beta = path_gain_matrix(layout, area, pl, out.z);
  if (!out.beta.allFinite() || (out.beta.array() <= 0.0).any()) {
    throw NumericalError("large-scale fading produced a non-positive or non-finite gain");
  }
  return out;
}

}  // namespace cellfree
