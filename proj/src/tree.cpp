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

#include "dppf/tree.hpp"

#include <map>
#include <utility>
#include <vector>

namespace dppf {
namespace {

using NodeIndex = std::map<std::pair<Index, Index>, Index>;

NodeIndex IndexNodes(const TreeMatrix& tm) {
  NodeIndex idx;
  for (size_t r = 0; r < tm.node_leaf_ranges.size(); ++r) {
    idx[tm.node_leaf_ranges[r]] = static_cast<Index>(r);
  }
  return idx;
}

// Maximal dyadic blocks covering leaves [0, t], as (first leaf, size).
std::vector<std::pair<Index, Index>> DyadicBlocks(Index t) {
  std::vector<std::pair<Index, Index>> blocks;
  const Index len = t + 1;
  Index start = 0;
  for (int b = 62; b >= 0; --b) {
    const Index size = Index{1} << b;
    if (len & size) {
      blocks.emplace_back(start, size);
      start += size;
    }
  }
  return blocks;
}

int Log2Exact(Index size) {
  int b = 0;
  while ((Index{1} << b) < size) ++b;
  return b;
}

TreeFactorization Empty(TreeKind kind, const TreeMatrix& tm) {
  TreeFactorization f;
  f.kind = kind;
  f.k = tm.k;
  f.n = tm.leaves();
  f.h = tm.matrix;
  f.w = Matrix::Zero(tm.leaves(), tm.nodes());
  return f;
}

// Minimum-norm weights over a full subtree of height h estimating the sum of
// all its leaves: u = M_h (M_h^T M_h)^{-1} 1.
Vector SubtreeWeights(int h) {
  const TreeMatrix sub = tree_matrix(h);
  const Matrix gram = sub.matrix.transpose() * sub.matrix;
  const Vector c = gram.llt().solve(Vector::Ones(sub.leaves()));
  return sub.matrix * c;
}

}  // namespace

std::string_view TreeKindName(TreeKind kind) {
  switch (kind) {
    case TreeKind::kVanilla: return "vanilla";
    case TreeKind::kHonakerFull: return "honaker_full";
    case TreeKind::kHonakerBelow: return "honaker_below";
  }
  return "unknown";
}

int tree_height_for(Index n) {
  if (n < 1 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "tree baselines need a power-of-two size, got " + std::to_string(n));
  }
  return Log2Exact(n) + 1;
}

TreeFactorization vanilla_w(int k) {
  const TreeMatrix tm = tree_matrix(k);
  const NodeIndex idx = IndexNodes(tm);
  TreeFactorization f = Empty(TreeKind::kVanilla, tm);
  for (Index t = 0; t < f.n; ++t) {
    for (const auto& [first, size] : DyadicBlocks(t)) {
      f.w(t, idx.at({first, first + size - 1})) = 1.0;
    }
  }
  return f;
}

TreeFactorization honaker_full(int k) {
  const TreeMatrix tm = tree_matrix(k);
  TreeFactorization f = Empty(TreeKind::kHonakerFull, tm);
  const Matrix gram = tm.matrix.transpose() * tm.matrix;
  const Matrix s = prefix_sum_matrix(f.n);
  // W = S (H^T H)^{-1} H^T
  const Matrix c = gram.llt().solve(s.transpose());
  f.w = (tm.matrix * c).transpose();
  return f;
}

TreeFactorization honaker_below(int k, HonakerBelowMethod method) {
  const TreeMatrix tm = tree_matrix(k);
  TreeFactorization f = Empty(TreeKind::kHonakerBelow, tm);

  if (method == HonakerBelowMethod::kRowPinv) {
    const std::vector<Index> last = last_nonzero_columns(tm.matrix);
    for (Index t = 0; t < f.n; ++t) {
      std::vector<Index> avail;
      for (Index r = 0; r < tm.nodes(); ++r) {
        if (last[static_cast<size_t>(r)] <= t) avail.push_back(r);
      }
      Matrix sub(static_cast<Index>(avail.size()), t + 1);
      for (size_t i = 0; i < avail.size(); ++i) {
        sub.row(static_cast<Index>(i)) = tm.matrix.row(avail[i]).head(t + 1);
      }
      const Eigen::RowVectorXd row = Eigen::RowVectorXd::Ones(t + 1) * pinv(sub);
      for (size_t i = 0; i < avail.size(); ++i) f.w(t, avail[i]) = row(static_cast<Index>(i));
    }
    return f;
  }

  // Every node inside [0, t] lies in exactly one block of the binary
  // expansion of t + 1, so the least-norm problem separates per block.
  std::vector<Vector> weights(static_cast<size_t>(k) + 1);
  for (int h = 1; h <= k; ++h) weights[static_cast<size_t>(h)] = SubtreeWeights(h);
  const NodeIndex idx = IndexNodes(tm);
  for (Index t = 0; t < f.n; ++t) {
    for (const auto& [first, size] : DyadicBlocks(t)) {
      const Index root = idx.at({first, first + size - 1});
      const Vector& u = weights[static_cast<size_t>(Log2Exact(size) + 1)];
      f.w.row(t).segment(root - u.size() + 1, u.size()) = u.transpose();
    }
  }
  return f;
}

Vector per_step_variance(const Matrix& w, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "per_step_variance: sigma must be > 0");
  return sigma * sigma * w.rowwise().squaredNorm();
}

}  // namespace dppf
