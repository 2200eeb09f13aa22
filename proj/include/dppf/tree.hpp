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

// Binary-tree aggregation written as factorizations S = W M_k.

#ifndef DPPF_TREE_HPP_
#define DPPF_TREE_HPP_

#include <string_view>

#include "dppf/linalg.hpp"
#include "dppf/loss.hpp"
#include "dppf/operators.hpp"

namespace dppf {

enum class TreeKind { kVanilla, kHonakerFull, kHonakerBelow };

std::string_view TreeKindName(TreeKind kind);

struct TreeFactorization {
  TreeKind kind = TreeKind::kVanilla;
  int k = 0;
  Index n = 0;  // 2^(k-1) leaves
  Matrix w;     // n x (2n - 1)
  Matrix h;     // tree_matrix(k).matrix

  LossReport loss() const { return loss_of(w, h); }
};

// 0/1 decoder: row t adds the nodes of the binary expansion of t + 1.
TreeFactorization vanilla_w(int k);

// S pinv(M_k), computed from the normal equations since M_k has full
// column rank.
TreeFactorization honaker_full(int k);

enum class HonakerBelowMethod {
  kBlocks,     // per-height closed form, assembled over dyadic blocks
  kRowPinv,    // literal per-row pseudoinverse over the fully-past nodes
};

TreeFactorization honaker_below(int k, HonakerBelowMethod method = HonakerBelowMethod::kBlocks);

// sigma^2 ||w[t, :]||^2 for every t.
Vector per_step_variance(const Matrix& w, double sigma);

// Leaf count as a tree height: n = 2^(k-1). Throws for non powers of two.
int tree_height_for(Index n);

}  // namespace dppf

#endif  // DPPF_TREE_HPP_
