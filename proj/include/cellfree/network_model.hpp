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

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Square deployment area, optionally wrapped into a torus.
struct AreaConfig {
  double side_km = 2.0;
  bool wrap = true;

  void validate() const;
};

/// AP and user positions in km, all inside [0, side_km)^2.
struct Layout {
  std::vector<Point> aps;
  std::vector<Point> users;

  std::size_t num_aps() const { return aps.size(); }
  std::size_t num_users() const { return users.size(); }
};

/// Three-slope path loss with COST-231 Hata far-field constant.
///
/// Gains are linear. The near constants are derived from the far constant so
/// the curve is continuous at both breakpoints:
///   c1 = c2 / d1^1.5,  c0 = c1 / d0^2.
struct PathLossParams {
  double f_mhz = 1900.0;
  double h_b_m = 15.0;
  double h_r_m = 1.65;
  double d0_km = 0.01;
  double d1_km = 0.05;
  double near_exponent = 2.0;
  double far_exponent = 3.5;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  /// Builds the parameter set for the given carrier and antenna heights.
  static PathLossParams cost231(double f_mhz, double h_b_m, double h_r_m);
};

/// Log-normal shadowing with the two-component (AP part, user part) spatial
/// correlation model:
///   10 log10 z_mk = sqrt(delta) a_m + sqrt(1 - delta) b_k,
///   cov(a_m, a_m') = sigma^2 base^(-dist(m, m') / d_decorr), same for b.
struct ShadowingParams {
  double sigma_db = 8.0;
  double split_delta = 0.5;
  double d_decorr_km = 0.1;
  bool independent = false;
  double correlation_base = 2.0;

  void validate() const;
};

struct LargeScaleFading {
  Eigen::MatrixXd beta;  // M x K linear gains
  Eigen::MatrixXd z;     // M x K linear shadowing factors
};

Layout generate_layout(std::size_t num_aps, std::size_t num_users, const AreaConfig& area,
                       RngStream& rng);

/// Distance on the torus (or plain Euclidean when the area is not wrapped).
double toroidal_distance(const Point& p, const Point& q, double side_km);
double toroidal_distance(const Point& p, const Point& q, const AreaConfig& area);

/// COST-231 Hata far-field constant, 10 log10(c2) in dB.
double cost231_constant_db(double f_mhz, double h_b_m, double h_r_m);
double cost231_constant(double f_mhz, double h_b_m, double h_r_m);

/// Linear path gain at distance d_km. The shadow factor only enters the far
/// slope (d > d1).
double path_loss(double d_km, const PathLossParams& params, double z = 1.0);

/// Correlation matrix base^(-dist/d_decorr) for a point set.
Eigen::MatrixXd shadowing_correlation(const std::vector<Point>& points, const AreaConfig& area,
                                      const ShadowingParams& params);

/// Draws a zero-mean Gaussian vector with covariance sigma^2 * corr. Falls
/// back to diagonal jitter when the correlation matrix is numerically
/// singular (co-located points).
Eigen::VectorXd sample_correlated_gaussian(const Eigen::MatrixXd& corr, double sigma,
                                           RngStream& rng);

/// Linear shadowing factors z (M x K).
Eigen::MatrixXd correlated_shadowing(const Layout& layout, const AreaConfig& area,
                                     const ShadowingParams& params, RngStream& rng);

LargeScaleFading large_scale_fading(const Layout& layout, const AreaConfig& area,
                                    const PathLossParams& pl, const ShadowingParams& sh,
                                    RngStream& rng);

/// beta from a fixed layout and shadow matrix, no randomness.
Eigen::MatrixXd path_gain_matrix(const Layout& layout, const AreaConfig& area,
                                 const PathLossParams& pl, const Eigen::MatrixXd& z);

}  // namespace cellfree
