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

#ifndef DPPF_OPERATORS_HPP_
#define DPPF_OPERATORS_HPP_

#include <utility>
#include <vector>

#include "dppf/linalg.hpp"

namespace dppf {

// Lower-triangular all-ones matrix: (S x)_t = x_0 + ... + x_t.
template <typename Scalar = double>
Mat<Scalar> prefix_sum_matrix(Index n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "prefix_sum_matrix: n must be >= 1");
  Mat<Scalar> s = Mat<Scalar>::Zero(n, n);
  s.template triangularView<Eigen::Lower>().setOnes();
  return s;
}

template <typename Scalar = double>
Mat<Scalar> antidiagonal(Index n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "antidiagonal: n must be >= 1");
  Mat<Scalar> p = Mat<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) p(i, n - 1 - i) = Scalar(1);
  return p;
}

// Binary-tree measurement matrix on 2^(k-1) leaves. Rows are ordered as the
// recursion builds them: left subtree, right subtree, then the parent.
struct TreeMatrix {
  int k = 0;
  Matrix matrix;
  // Inclusive, zero-based leaf range per row.
  std::vector<std::pair<Index, Index>> node_leaf_ranges;

  Index leaves() const { return matrix.cols(); }
  Index nodes() const { return matrix.rows(); }
};

TreeMatrix tree_matrix(int k);

// Index of the last nonzero column in each row of h (-1 for a zero row).
std::vector<Index> last_nonzero_columns(const Matrix& h, double threshold = 1e-12);

// True when every output t only reads measurements whose last input is <= t.
bool is_streaming_pair(const Matrix& w, const Matrix& h, double threshold = 1e-12);

}  // namespace dppf

#endif  // DPPF_OPERATORS_HPP_
