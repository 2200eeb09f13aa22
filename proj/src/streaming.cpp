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

#include "dppf/streaming.hpp"

#include <cmath>
#include <vector>

#include "dppf/operators.hpp"

namespace dppf {
namespace {

constexpr double kNonzero = 1e-12;

// Applies R = [[c, -s], [s, c]] to columns p, q of w and the matching
// transpose to rows p, q of h, so w * h is unchanged.
void Rotate(Matrix& w, Matrix& h, Index p, Index q, double c, double s) {
  const Vector wp = w.col(p);
  w.col(p) = c * wp + s * w.col(q);
  w.col(q) = -s * wp + c * w.col(q);
  const Eigen::RowVectorXd hp = h.row(p);
  h.row(p) = c * hp + s * h.row(q);
  h.row(q) = -s * hp + c * h.row(q);
}

}  // namespace

Matrix psi(const Matrix& x, const ToleranceConfig& tol) {
  internal::RequireSquare(x, "psi");
  const Matrix l = cholesky(x.reverse().eval(), tol);
  Matrix h = l.transpose().reverse();
  h.triangularView<Eigen::StrictlyUpper>().setZero();
  return h;
}

StreamingFactorization factorize_streaming(const Matrix& s, const FixedPointResult& result) {
  if (s.rows() != s.cols() || result.x_star.rows() != s.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "factorize_streaming: size mismatch");
  }
  StreamingFactorization f;
  f.s = s;
  f.h = psi(result.x_star);
  f.w = f.h.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(s);
  f.w.triangularView<Eigen::StrictlyUpper>().setZero();
  return f;
}

StreamingFactorization reduce_to_square(const Matrix& w_in, const Matrix& h_in,
                                        const Matrix& s, ReduceReport* report,
                                        const RotationObserver& observer) {
  const Index n = s.rows();
  if (s.cols() != n || w_in.rows() != n || h_in.cols() != n || w_in.cols() != h_in.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "reduce_to_square: inconsistent shapes");
  }
  if (!(relative_frobenius_error(w_in * h_in, s) <= 1e-8)) {
    throw Error(ErrorCode::kNonFactorization, "reduce_to_square: w * h does not equal s");
  }
  if (!is_streaming_pair(w_in, h_in)) {
    throw Error(ErrorCode::kNotOnline, "reduce_to_square: w reads future measurements");
  }

  ReduceReport rep;
  const LossReport before = loss_of(w_in, h_in);
  rep.loss_before = before.loss;
  rep.gamma_before = before.gamma;

  Matrix w = w_in;
  Matrix h = h_in;
  const Index m = h.rows();
  const std::vector<Index> last = last_nonzero_columns(h_in, kNonzero);
  std::vector<bool> assigned(static_cast<size_t>(m), false);
  std::vector<Index> order(static_cast<size_t>(n), -1);  // -1: zero measurement

  for (Index t = 0; t < n; ++t) {
    std::vector<Index> pool;
    for (Index j = 0; j < m; ++j) {
      if (!assigned[static_cast<size_t>(j)] && last[static_cast<size_t>(j)] <= t) {
        pool.push_back(j);
      }
    }
    Index pivot = -1;
    for (Index j : pool) {
      if (std::abs(w(t, j)) <= kNonzero) continue;
      if (pivot < 0) {
        pivot = j;
        continue;
      }
      const double a = w(t, pivot);
      const double b = w(t, j);
      const double z = std::hypot(a, b);
      Rotate(w, h, pivot, j, a / z, b / z);
      w(t, j) = 0.0;
      ++rep.rotations;
      if (observer) observer(w, h);
    }
    if (pivot < 0 && !pool.empty()) pivot = pool.front();
    if (pivot < 0) {
      ++rep.inserted_zero;
    } else {
      assigned[static_cast<size_t>(pivot)] = true;
    }
    order[static_cast<size_t>(t)] = pivot;
  }
  rep.loss_rotated = loss_of(w, h).loss;

  for (Index j = 0; j < m; ++j) {
    if (!assigned[static_cast<size_t>(j)]) ++rep.discarded;
  }

  StreamingFactorization out;
  out.s = s;
  out.w = Matrix::Zero(n, n);
  out.h = Matrix::Zero(n, n);
  for (Index t = 0; t < n; ++t) {
    const Index j = order[static_cast<size_t>(t)];
    if (j < 0) continue;
    out.w.col(t) = w.col(j);
    out.h.row(t) = h.row(j);
  }
  out.w.triangularView<Eigen::StrictlyUpper>().setZero();
  out.h.triangularView<Eigen::StrictlyUpper>().setZero();

  const LossReport after = loss_of(out.w, out.h);
  rep.loss_after = after.loss;
  rep.gamma_after = after.gamma;
  if (report) *report = rep;
  return out;
}

}  // namespace dppf
