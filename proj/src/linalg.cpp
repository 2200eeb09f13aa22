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

#include "dppf/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "dppf/random.hpp"

#if defined(DPPF_HAVE_LAPACKE)
#include <lapacke.h>
#endif

namespace dppf {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotPSD: return "NotPSD";
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kInfeasibleFactorization: return "InfeasibleFactorization";
    case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularS: return "SingularS";
    case ErrorCode::kNotOnline: return "NotOnline";
    case ErrorCode::kNonFactorization: return "NonFactorization";
    case ErrorCode::kStreamExhausted: return "StreamExhausted";
    case ErrorCode::kInvalidPrivacyParams: return "InvalidPrivacyParams";
    case ErrorCode::kInputOutOfRange: return "InputOutOfRange";
    case ErrorCode::kTooLargeForBruteForce: return "TooLargeForBruteForce";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace internal {

#if defined(DPPF_HAVE_LAPACKE)

namespace {

// Some OpenBLAS builds pick a CPU kernel that returns wrong eigenvectors
// without reporting an error. The first wrong answer disables LAPACK for the
// rest of the process.
std::atomic<bool> g_lapack_trusted{true};

Vector ProbeVector(Index n) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = CounterGaussian(0x5eedULL, static_cast<std::uint64_t>(i));
  return x;
}

bool EigenpairsPlausible(const Matrix& a, const SymmetricEigen<double>& e) {
  const Vector x = ProbeVector(a.rows());
  const Vector y = e.vectors.transpose() * x;
  const double scale = a.norm() * x.norm() + 1.0;
  const double tol = 1e-8;
  if ((e.vectors * y - x).norm() > tol * x.norm()) return false;
  const Vector ax = a.selfadjointView<Eigen::Lower>() * x;
  return (e.vectors * (e.values.asDiagonal() * y) - ax).norm() <= tol * scale;
}

}  // namespace

bool LapackSymmetricEigen(const Matrix& a, bool compute_vectors,
                          SymmetricEigen<double>& out) {
  if (!g_lapack_trusted.load(std::memory_order_relaxed)) return false;
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Matrix work = a;
  out.values.resize(n);
  out.vectors.resize(compute_vectors ? n : 0, compute_vectors ? n : 0);
  std::vector<lapack_int> support(2 * static_cast<size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, compute_vectors ? 'V' : 'N', 'A', 'L', n, work.data(), n, 0.0, 0.0, 0,
      0, 0.0, &found, out.values.data(), compute_vectors ? out.vectors.data() : nullptr,
      compute_vectors ? n : 1, support.data());
  if (info != 0) {
    throw Error(ErrorCode::kNoConvergence, "dsyevr failed with info=" + std::to_string(info));
  }
  if (!compute_vectors) {
    // Eigenvalues alone are checked through the trace and Frobenius norm.
    const double fro = a.squaredNorm();
    if (std::abs(out.values.squaredNorm() - fro) > 1e-8 * fro + 1e-300 ||
        std::abs(out.values.sum() - a.trace()) > 1e-8 * std::sqrt(fro * n)) {
      g_lapack_trusted = false;
      return false;
    }
    return true;
  }
  if (!EigenpairsPlausible(a, out)) {
    g_lapack_trusted = false;
    return false;
  }
  return true;
}

bool LapackSingularValues(const Matrix& a, Vector& out) {
  if (!g_lapack_trusted.load(std::memory_order_relaxed)) return false;
  Matrix work = a;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  out.resize(std::min(m, n));
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, out.data(),
                     nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw Error(ErrorCode::kNoConvergence,
                "dgesdd failed with info=" + std::to_string(info));
  }
  const double fro = a.squaredNorm();
  if (std::abs(out.squaredNorm() - fro) > 1e-8 * fro) {
    g_lapack_trusted = false;
    return false;
  }
  return true;
}

#else

bool LapackSymmetricEigen(const Matrix&, bool, SymmetricEigen<double>&) {
  return false;
}

bool LapackSingularValues(const Matrix&, Vector&) { return false; }

#endif

}  // namespace internal

bool lapack_in_use() {
#if defined(DPPF_HAVE_LAPACKE)
  return internal::g_lapack_trusted.load(std::memory_order_relaxed);
#else
  return false;
#endif
}

}  // namespace dppf
