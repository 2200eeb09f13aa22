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

// Optimal Gram matrix for min tr(S^T S X^{-1}) subject to diag(X) = 1,
// found as the fixed point of
//
//   phi(v) = diag( sqrt( D_v^{1/2} S^T S D_v^{1/2} ) ),   D_v = diag(v).
//
// At the fixed point lambda, X* = D^{-1/2} sqrt(D^{1/2} S^T S D^{1/2}) D^{-1/2}
// and S^T S = X* diag(lambda) X*.

#ifndef DPPF_SOLVER_HPP_
#define DPPF_SOLVER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "dppf/linalg.hpp"

namespace dppf {

enum class SolverInit { kOnes, kRandom };

struct SolverConfig {
  double rtol = 1e-5;
  int max_iter = 10000;
  SolverInit init = SolverInit::kOnes;
  std::uint64_t seed = 0;  // used by kRandom: entries uniform on (0, 1]
  ToleranceConfig tol;
  // Called after every iteration with (iteration, residual).
  std::function<void(int, double)> progress;
};

struct FixedPointResult {
  Index n = 0;
  Vector lambda;
  Matrix x_star;       // unit diagonal after rescaling
  int iterations = 0;
  double fp_residual = 0.0;
  double kkt_residual = 0.0;
  double loss = 0.0;
  // max_i |X_ii - 1| before the diagonal rescaling
  double diagonal_drift = 0.0;

  double root_loss() const;
};

class NoConvergence : public Error {
 public:
  NoConvergence(Vector last, double residual, int iterations);

  const Vector& last_iterate() const { return last_; }
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  Vector last_;
  double residual_;
  int iterations_;
};

Vector phi(const Vector& v, const Matrix& s, const ToleranceConfig& tol = {});

// Same map with S^T S precomputed.
Vector phi_gram(const Vector& v, const Matrix& gram, const ToleranceConfig& tol = {});

// Unrescaled X(v) = D^{-1/2} sqrt(D^{1/2} G D^{1/2}) D^{-1/2}.
Matrix x_from_lambda(const Vector& lambda, const Matrix& gram,
                     const ToleranceConfig& tol = {});

Vector initial_vector(Index n, const SolverConfig& cfg);

FixedPointResult solve(const Matrix& s, const SolverConfig& cfg = {});

double kkt_residual(const Matrix& s, const Matrix& x, const Vector& lambda);

struct RtolSweepRow {
  double rtol = 0.0;
  double loss = 0.0;
  int iterations = 0;
};

// Equivalent to one solve() per tolerance from the same init, done in a
// single pass since the iterate sequence does not depend on rtol.
// rtols must be positive and strictly descending.
std::vector<RtolSweepRow> rtol_sweep(const Matrix& s, const std::vector<double>& rtols,
                                     const SolverConfig& cfg = {});

}  // namespace dppf

#endif  // DPPF_SOLVER_HPP_
