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

#include "dppf/operators.hpp"

#include <cmath>

namespace dppf {
namespace {

// Fills rows [row0, row0 + 2^k - 1) for the subtree on leaves
// [leaf0, leaf0 + 2^(k-1)).
void FillTree(int k, Index row0, Index leaf0, TreeMatrix& out) {
  const Index leaves = Index{1} << (k - 1);
  if (k > 1) {
    const Index child_rows = (Index{1} << (k - 1)) - 1;
    FillTree(k - 1, row0, leaf0, out);
    FillTree(k - 1, row0 + child_rows, leaf0 + leaves / 2, out);
  }
  const Index root = row0 + (Index{1} << k) - 2;
  out.matrix.row(root).segment(leaf0, leaves).setOnes();
  out.node_leaf_ranges[static_cast<size_t>(root)] = {leaf0, leaf0 + leaves - 1};
}

}  // namespace

TreeMatrix tree_matrix(int k) {
  if (k < 1 || k > 30) {
    throw Error(ErrorCode::kInvalidArgument, "tree_matrix: k must be in [1, 30]");
  }
  TreeMatrix t;
  t.k = k;
  const Index rows = (Index{1} << k) - 1;
  const Index cols = Index{1} << (k - 1);
  t.matrix = Matrix::Zero(rows, cols);
  t.node_leaf_ranges.assign(static_cast<size_t>(rows), {0, 0});
  FillTree(k, 0, 0, t);
  return t;
}

std::vector<Index> last_nonzero_columns(const Matrix& h, double threshold) {
  std::vector<Index> last(static_cast<size_t>(h.rows()), -1);
  for (Index j = 0; j < h.rows(); ++j) {
    for (Index c = h.cols() - 1; c >= 0; --c) {
      if (std::abs(h(j, c)) > threshold) {
        last[static_cast<size_t>(j)] = c;
        break;
      }
    }
  }
  return last;
}

bool is_streaming_pair(const Matrix& w, const Matrix& h, double threshold) {
  if (w.cols() != h.rows() || w.rows() != h.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "is_streaming_pair: need w (n x d) and h (d x n)");
  }
  const std::vector<Index> last = last_nonzero_columns(h, threshold);
  for (Index t = 0; t < w.rows(); ++t) {
    for (Index j = 0; j < w.cols(); ++j) {
      if (std::abs(w(t, j)) > threshold && last[static_cast<size_t>(j)] > t) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace dppf
