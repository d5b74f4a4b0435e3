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

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cellfree/errors.hpp"

namespace cellfree {

/// Solves with Sigma = diag(q) + U U^H, q > 0, through the r x r capacitance
/// matrix I + F^H F where F = diag(q)^{-1/2} U. One factorization serves any
/// number of right-hand sides; cost is O(M r^2) to build and O(M r) per solve.
template <typename Scalar>
class DiagonalPlusLowRank {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  DiagonalPlusLowRank(const Eigen::VectorXd& q, Matrix u)
      : inv_sqrt_q_(q.cwiseSqrt().cwiseInverse()), f_(std::move(u)) {
    if ((q.array() <= 0.0).any()) {
      throw NumericalError("diagonal part of the covariance must be positive");
    }
    f_ = inv_sqrt_q_.asDiagonal() * f_;
    Matrix cap = Matrix::Identity(f_.cols(), f_.cols());
    cap.template selfadjointView<Eigen::Lower>().rankUpdate(f_.adjoint());
    capacitance_.compute(cap);
    if (capacitance_.info() != Eigen::Success) {
      throw NumericalError("capacitance matrix is not positive definite");
    }
  }

  Eigen::Index size() const { return f_.rows(); }
  Eigen::Index rank() const { return f_.cols(); }

  /// Sigma^{-1} b.
  Vector solve(const Vector& b) const {
    const Vector y = inv_sqrt_q_.asDiagonal() * b;
    const Vector z = y - f_ * capacitance_.solve(f_.adjoint() * y);
    return inv_sqrt_q_.asDiagonal() * z;
  }

  /// Sigma^{-1} u_j via the push-through identity
  /// (I + F F^H)^{-1} F = F (I + F^H F)^{-1}, which avoids cancellation.
  Vector solve_column(Eigen::Index j) const {
    Vector e = Vector::Zero(f_.cols());
    e(j) = Scalar(1);
    return inv_sqrt_q_.asDiagonal() * (f_ * capacitance_.solve(e));
  }

 private:
  Eigen::VectorXd inv_sqrt_q_;
  Matrix f_;
  Eigen::LLT<Matrix> capacitance_;
};

}  // namespace cellfree
