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

#ifndef DPPF_STREAMING_HPP_
#define DPPF_STREAMING_HPP_

#include <functional>

#include "dppf/linalg.hpp"
#include "dppf/loss.hpp"
#include "dppf/solver.hpp"

namespace dppf {

// Lower-triangular pair with w * h = s.
struct StreamingFactorization {
  Matrix s;
  Matrix w;
  Matrix h;

  LossReport loss() const { return loss_of(w, h); }
};

// The lower-triangular H with H^T H = x: H = P chol(P x P)^T P, P the
// antidiagonal flip.
Matrix psi(const Matrix& x, const ToleranceConfig& tol = {});

StreamingFactorization factorize_streaming(const Matrix& s, const FixedPointResult& result);

struct ReduceReport {
  double loss_before = 0.0;
  double loss_rotated = 0.0;  // after all rotations, before discarding rows
  double loss_after = 0.0;
  double gamma_before = 0.0;
  double gamma_after = 0.0;
  int rotations = 0;
  int discarded = 0;      // measurements dropped for carrying no weight
  int inserted_zero = 0;  // empty positions filled with a zero measurement
};

// Called after every rotation with the current (w, h) working pair.
using RotationObserver = std::function<void(const Matrix& w, const Matrix& h)>;

// Turns an online factorization with h of shape d x n (d may exceed n) into
// a square lower-triangular one by rotating W columns pairwise.
StreamingFactorization reduce_to_square(const Matrix& w, const Matrix& h, const Matrix& s,
                                        ReduceReport* report = nullptr,
                                        const RotationObserver& observer = {});

}  // namespace dppf

#endif  // DPPF_STREAMING_HPP_
