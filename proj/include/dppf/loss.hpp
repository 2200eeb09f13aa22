// Copyright 2026 The DPPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPF_LOSS_HPP_
#define DPPF_LOSS_HPP_

#include <cmath>

#include "dppf/linalg.hpp"

namespace dppf {

struct LossReport {
  double gamma = 0.0;
  double frob_w_sq = 0.0;
  double loss = 0.0;
  double root_loss = 0.0;
};

LossReport make_loss_report(double gamma, double frob_w_sq);

// Expected squared reconstruction error of W (H x + z) at unit noise
// calibrated to the sensitivity of H.
template <typename DerivedW, typename DerivedH>
LossReport loss_of(const Eigen::MatrixBase<DerivedW>& w,
                   const Eigen::MatrixBase<DerivedH>& h) {
  if (w.cols() != h.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "loss_of: w cols must equal h rows");
  }
  return make_loss_report(static_cast<double>(max_column_norm(h)),
                          static_cast<double>(w.squaredNorm()));
}

// Minimum-Frobenius-norm decoder S pinv(H).
template <typename DerivedS, typename DerivedH>
Mat<typename DerivedS::Scalar> optimal_w(const Eigen::MatrixBase<DerivedS>& s,
                                         const Eigen::MatrixBase<DerivedH>& h,
                                         const ToleranceConfig& tol = {}) {
  using Scalar = typename DerivedS::Scalar;
  if (s.cols() != h.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "optimal_w: s and h need the same column count");
  }
  Mat<Scalar> w = s * pinv(h, tol);
  const double residual = relative_frobenius_error(w * h, s);
  if (!(residual <= 1e-6)) {
    throw Error(ErrorCode::kInfeasibleFactorization,
                "S is not in the row space of H (relative residual " +
                    std::to_string(residual) + ")");
  }
  return w;
}

// tr(S^T S X^{-1}) = ||L^{-1} S^T||_F^2 with X = L L^T; X^{-1} is never formed.
template <typename DerivedS, typename DerivedX>
double trace_loss(const Eigen::MatrixBase<DerivedS>& s,
                  const Eigen::MatrixBase<DerivedX>& x,
                  const ToleranceConfig& tol = {}) {
  using Scalar = typename DerivedS::Scalar;
  if (x.rows() != s.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "trace_loss: x must match s columns");
  }
  const Mat<Scalar> l = cholesky(x, tol);
  const Mat<Scalar> y = l.template triangularView<Eigen::Lower>().solve(s.transpose());
  return static_cast<double>(y.squaredNorm());
}

}  // namespace dppf

#endif  // DPPF_LOSS_HPP_
