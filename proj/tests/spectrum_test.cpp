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

#include "dppf/spectrum.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "dppf/operators.hpp"
#include "dppf/solver.hpp"
#include "dppf/tree.hpp"
#include "test_util.hpp"

namespace dppf {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(PrefixSingularValues, OneByOne) {
  const Vector sv = prefix_singular_values(1);
  ASSERT_EQ(sv.size(), 1);
  EXPECT_NEAR(sv(0), 1.0, 1e-15);
}

TEST(PrefixSingularValues, MatchNumericalSvd) {
  for (Index n : {2, 4, 8, 32, 128}) {
    const Vector closed = prefix_singular_values(n);
    Eigen::BDCSVD<Matrix> svd(prefix_sum_matrix(n));
    const Vector numeric = svd.singularValues();
    EXPECT_LE(((closed - numeric).array() / numeric.array()).abs().maxCoeff(), 1e-8) << "n=" << n;
    for (Index i = 1; i < n; ++i) EXPECT_GT(closed(i - 1), closed(i));
    EXPECT_GT(closed.minCoeff(), 0.0);
  }
}

TEST(PrefixSingularValues, LargestIsNearSmallAngleLimit) {
  const Index n = 256;
  EXPECT_REL_NEAR(prefix_singular_values(n)(0), (4.0 * n + 2.0) / (2.0 * kPi), 1e-3);
}

TEST(OddSumBound, IdentityAndHandExample) {
  for (Index n : {1, 4, 7}) {
    const double half = static_cast<double>((n + 1) / 2);
    EXPECT_DOUBLE_EQ(generic_lower_bound(Matrix::Identity(n, n)), half * half / n);
  }
  Vector sv(3);
  sv << 5, 3, 1;
  EXPECT_DOUBLE_EQ(odd_sum_bound(sv), 36.0 / 3.0);
}

TEST(GenericLowerBound, ClosedFormMatchesNumericRoute) {
  const Matrix s = prefix_sum_matrix(40);
  EXPECT_TRUE(is_prefix_sum_matrix(s));
  Matrix perturbed = s;
  perturbed(39, 0) += 1e-13;  // no longer recognized, so the SVD route runs
  EXPECT_FALSE(is_prefix_sum_matrix(perturbed));
  EXPECT_REL_NEAR(generic_lower_bound(perturbed), generic_lower_bound(s), 1e-9);
  EXPECT_FALSE(is_prefix_sum_matrix(Matrix::Identity(3, 3)));
}

TEST(PrefixLogBound, Values) {
  EXPECT_NEAR(prefix_log_bound(2), 2.0 * std::log(2.0) * std::log(2.0) / (4.0 * kPi * kPi), 1e-15);
  EXPECT_NEAR(prefix_log_bound(2), 0.0243, 1e-4);
  EXPECT_THROW_CODE(prefix_log_bound(1), ErrorCode::kInvalidArgument);
}

TEST(PrefixLogBound, IncreasingAndBelowOddSum) {
  double prev = prefix_log_bound(2);
  for (Index n = 2; n <= 4096; ++n) {
    const double cur = prefix_log_bound(n);
    if (n >= 3) {
      ASSERT_GT(cur, prev) << "n=" << n;
    }
    prev = cur;
    const SpectrumReport r = prefix_spectrum_report(n);
    ASSERT_GE(r.odd_sum, static_cast<double>(n) / (2.0 * kPi) * std::log(static_cast<double>(n)))
        << "n=" << n;
    ASSERT_LE(r.analytic_log_bound, r.lower_bound) << "n=" << n;
  }
}

TEST(SpectrumReport, LargeSizeMagnitude) {
  const SpectrumReport r = prefix_spectrum_report(4096);
  EXPECT_EQ(r.n, 4096);
  EXPECT_EQ(r.singular_values.size(), 4096);
  EXPECT_NEAR(std::sqrt(r.analytic_log_bound), 84.7, 0.1);
  EXPECT_NEAR(std::sqrt(r.lower_bound), 123.2, 0.1);
  EXPECT_LT(std::sqrt(r.lower_bound), 217.3);
}

TEST(LowerBoundChain, BoundsSolverAndTree) {
  for (Index n : {2, 8, 64, 256}) {
    const Matrix s = prefix_sum_matrix(n);
    const double solver = solve(s).loss;
    const double tree = honaker_below(tree_height_for(n)).loss().loss;
    EXPECT_LE(prefix_log_bound(n), generic_lower_bound(s)) << "n=" << n;
    EXPECT_LE(generic_lower_bound(s), solver) << "n=" << n;
    EXPECT_LE(solver, tree) << "n=" << n;
  }
}

}  // namespace
}  // namespace dppf
