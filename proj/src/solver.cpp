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

#include "dppf/solver.hpp"

#include <cmath>

#include "dppf/loss.hpp"
#include "dppf/random.hpp"

namespace dppf {
namespace {

void RequirePositive(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      throw Error(ErrorCode::kNonPositiveInput,
                  "phi: entry " + std::to_string(i) + " is not strictly positive");
    }
  }
}

// Eigendecomposition of D^{1/2} G D^{1/2} plus the square roots of its
// spectrum; phi(v) and X(v) are both read off this.
struct ScaledRoot {
  SymmetricEigen<double> eig;
  Vector root;
};

ScaledRoot ScaledSqrt(const Vector& v, const Matrix& gram, const ToleranceConfig& tol) {
  RequirePositive(v);
  const Vector h = v.cwiseSqrt();
  Matrix b = h.asDiagonal() * gram * h.asDiagonal();
  b = (b + b.transpose()).eval() * 0.5;
  ScaledRoot out;
  out.eig = symmetric_eigen(b);
  out.root = clamped_sqrt_spectrum(out.eig.values, tol);
  return out;
}

Vector DiagonalOfRoot(const ScaledRoot& r) {
  // diag(V diag(root) V^T)_i = sum_k V_ik^2 root_k
  return r.eig.vectors.cwiseAbs2() * r.root;
}

Matrix XFromRoot(const Vector& v, const ScaledRoot& r) {
  const Matrix& q = r.eig.vectors;
  Matrix m = q * r.root.asDiagonal() * q.transpose();
  const Vector inv_h = v.cwiseSqrt().cwiseInverse();
  Matrix x = inv_h.asDiagonal() * m * inv_h.asDiagonal();
  return (x + x.transpose()) * 0.5;
}

void RequireSolvable(const Matrix& s, const SolverConfig& cfg) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "solve: s must be square and nonempty");
  }
  require_finite(s, "solve: s");
  if (!(cfg.rtol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "solve: rtol must be > 0");
  if (cfg.max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "solve: max_iter must be >= 1");
  const Vector sv = singular_values(s);
  const double cutoff = cfg.tol.rcond_for(s.rows()) * sv(0);
  if (!(sv(sv.size() - 1) > cutoff)) {
    throw Error(ErrorCode::kSingularS, "solve: s is rank deficient");
  }
}

FixedPointResult Finalize(const Matrix& s, const Matrix& gram, const Vector& v,
                          const ScaledRoot& r, int iterations, double residual) {
  FixedPointResult out;
  out.n = s.rows();
  out.lambda = v;
  out.iterations = iterations;
  out.fp_residual = residual;
  Matrix x = XFromRoot(v, r);
  const Vector d = x.diagonal();
  out.diagonal_drift = (d.array() - 1.0).abs().maxCoeff();
  const Vector e = d.cwiseSqrt().cwiseInverse();
  x = e.asDiagonal() * x * e.asDiagonal();
  x = (x + x.transpose()).eval() * 0.5;
  x.diagonal().setOnes();
  out.x_star = std::move(x);
  out.loss = trace_loss(s, out.x_star);
  const double gnorm = gram.norm();
  out.kkt_residual = (gram - out.x_star * v.asDiagonal() * out.x_star).norm() / gnorm;
  return out;
}

}  // namespace

double FixedPointResult::root_loss() const { return std::sqrt(loss); }

NoConvergence::NoConvergence(Vector last, double residual, int iterations)
    : Error(ErrorCode::kNoConvergence,
            "fixed-point iteration stopped after " + std::to_string(iterations) +
                " iterations with residual " + std::to_string(residual)),
      last_(std::move(last)),
      residual_(residual),
      iterations_(iterations) {}

Vector phi_gram(const Vector& v, const Matrix& gram, const ToleranceConfig& tol) {
  if (v.size() != gram.rows() || gram.rows() != gram.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "phi: v length must match s");
  }
  return DiagonalOfRoot(ScaledSqrt(v, gram, tol));
}

Vector phi(const Vector& v, const Matrix& s, const ToleranceConfig& tol) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "phi: s must be square");
  }
  const Matrix gram = s.transpose() * s;
  return phi_gram(v, gram, tol);
}

Matrix x_from_lambda(const Vector& lambda, const Matrix& gram, const ToleranceConfig& tol) {
  if (lambda.size() != gram.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "x_from_lambda: size mismatch");
  }
  return XFromRoot(lambda, ScaledSqrt(lambda, gram, tol));
}

Vector initial_vector(Index n, const SolverConfig& cfg) {
  if (cfg.init == SolverInit::kOnes) return Vector::Ones(n);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = CounterUniform(cfg.seed, static_cast<std::uint64_t>(i));
  return v;
}

FixedPointResult solve(const Matrix& s, const SolverConfig& cfg) {
  RequireSolvable(s, cfg);
  const Matrix gram = s.transpose() * s;
  Vector v = initial_vector(s.rows(), cfg);
  double residual = 0.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    ScaledRoot r = ScaledSqrt(v, gram, cfg.tol);
    Vector next = DiagonalOfRoot(r);
    residual = (next - v).norm() / v.norm();
    if (cfg.progress) cfg.progress(it, residual);
    if (residual < cfg.rtol) return Finalize(s, gram, v, r, it, residual);
    v = std::move(next);
  }
  throw NoConvergence(v, residual, cfg.max_iter);
}

double kkt_residual(const Matrix& s, const Matrix& x, const Vector& lambda) {
  if (s.rows() != s.cols() || x.rows() != s.rows() || x.cols() != s.cols() ||
      lambda.size() != s.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "kkt_residual: inconsistent shapes");
  }
  const Matrix gram = s.transpose() * s;
  return (gram - x * lambda.asDiagonal() * x).norm() / gram.norm();
}

std::vector<RtolSweepRow> rtol_sweep(const Matrix& s, const std::vector<double>& rtols,
                                     const SolverConfig& cfg) {
  if (rtols.empty()) throw Error(ErrorCode::kInvalidArgument, "rtol_sweep: empty rtol list");
  for (size_t i = 0; i < rtols.size(); ++i) {
    if (!(rtols[i] > 0.0) || (i > 0 && !(rtols[i] < rtols[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rtol_sweep: tolerances must be positive and strictly descending");
    }
  }
  SolverConfig base = cfg;
  base.rtol = rtols.back();
  RequireSolvable(s, base);
  const Matrix gram = s.transpose() * s;
  Vector v = initial_vector(s.rows(), cfg);
  std::vector<RtolSweepRow> rows;
  double residual = 0.0;
  for (int it = 1; it <= cfg.max_iter && rows.size() < rtols.size(); ++it) {
    ScaledRoot r = ScaledSqrt(v, gram, cfg.tol);
    Vector next = DiagonalOfRoot(r);
    residual = (next - v).norm() / v.norm();
    if (cfg.progress) cfg.progress(it, residual);
    // One iterate can satisfy several tolerances at once.
    while (rows.size() < rtols.size() && residual < rtols[rows.size()]) {
      const FixedPointResult fp = Finalize(s, gram, v, r, it, residual);
      rows.push_back({rtols[rows.size()], fp.loss, it});
    }
    v = std::move(next);
  }
  if (rows.size() < rtols.size()) throw NoConvergence(v, residual, cfg.max_iter);
  return rows;
}

}  // namespace dppf
