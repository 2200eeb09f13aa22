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

#include <cmath>
#include <numbers>

namespace dppf {

Vector prefix_singular_values(Index n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "prefix_singular_values: n must be >= 1");
  Vector sv(n);
  const double denom = 4.0 * static_cast<double>(n) + 2.0;
  for (Index k = 1; k <= n; ++k) {
    sv(k - 1) = 1.0 / (2.0 * std::sin((2.0 * static_cast<double>(k) - 1.0) * std::numbers::pi / denom));
  }
  return sv;
}

double odd_sum_bound(const Vector& singular_values) {
  const Index n = singular_values.size();
  if (n == 0) return 0.0;
  double odd = 0.0;
  for (Index i = 0; i < n; i += 2) odd += singular_values(i);
  return odd * odd / static_cast<double>(n);
}

bool is_prefix_sum_matrix(const Matrix& s) {
  if (s.rows() != s.cols()) return false;
  for (Index j = 0; j < s.cols(); ++j) {
    for (Index i = 0; i < s.rows(); ++i) {
      if (s(i, j) != (i >= j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

double generic_lower_bound(const Matrix& s) {
  internal::RequireSquare(s, "generic_lower_bound");
  if (s.rows() == 0) return 0.0;
  if (is_prefix_sum_matrix(s)) return odd_sum_bound(prefix_singular_values(s.rows()));
  return odd_sum_bound(singular_values(s));
}

double prefix_log_bound(Index n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "prefix_log_bound: n must be >= 2");
  const double ln = std::log(static_cast<double>(n));
  return static_cast<double>(n) * ln * ln / (4.0 * std::numbers::pi * std::numbers::pi);
}

SpectrumReport prefix_spectrum_report(Index n) {
  SpectrumReport r;
  r.n = n;
  r.singular_values = prefix_singular_values(n);
  for (Index i = 0; i < n; i += 2) r.odd_sum += r.singular_values(i);
  r.lower_bound = r.odd_sum * r.odd_sum / static_cast<double>(n);
  r.analytic_log_bound = n >= 2 ? prefix_log_bound(n) : 0.0;
  return r;
}

}  // namespace dppf
