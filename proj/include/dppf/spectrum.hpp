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

#ifndef DPPF_SPECTRUM_HPP_
#define DPPF_SPECTRUM_HPP_

#include "dppf/linalg.hpp"

namespace dppf {

struct SpectrumReport {
  Index n = 0;
  Vector singular_values;  // descending
  double odd_sum = 0.0;    // sigma_1 + sigma_3 + ...
  double lower_bound = 0.0;
  double analytic_log_bound = 0.0;  // n (ln n)^2 / (4 pi^2), 0 for n < 2
};

// sigma_k = 1 / (2 sin((2k - 1) pi / (4n + 2))), k = 1..n.
Vector prefix_singular_values(Index n);

// (sigma_1 + sigma_3 + ...)^2 / n for descending singular values.
double odd_sum_bound(const Vector& singular_values);

// Lower bound on the loss of any factorization of s. Prefix-sum inputs use
// the closed-form spectrum.
double generic_lower_bound(const Matrix& s);

double prefix_log_bound(Index n);

SpectrumReport prefix_spectrum_report(Index n);

bool is_prefix_sum_matrix(const Matrix& s);

}  // namespace dppf

#endif  // DPPF_SPECTRUM_HPP_
