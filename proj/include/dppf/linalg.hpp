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

// Dense kernels shared by every other module. All functions are pure and
// accept any Eigen dense expression; results are evaluated plain matrices.

#ifndef DPPF_LINALG_HPP_
#define DPPF_LINALG_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>

#include "dppf/errors.hpp"

namespace dppf {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

struct ToleranceConfig {
  double sym_tol = 1e-10;    // relative Frobenius asymmetry allowed
  double eig_clamp = 1e-12;  // negative eigenvalues above -eig_clamp*max|eig| clamp to 0
  std::optional<double> rcond;  // unset: rows * machine epsilon

  template <typename Scalar = double>
  double rcond_for(Index rows) const {
    if (rcond) return *rcond;
    return static_cast<double>(rows) * std::numeric_limits<Scalar>::epsilon();
  }
};

enum class EigenBackend {
  kAuto,   // LAPACK dsyevr for double when built with it and its output checks out
  kEigen,  // always Eigen's tridiagonal QR
};

// Ascending eigenvalues; columns of `vectors` are the matching eigenvectors.
template <typename Scalar>
struct SymmetricEigen {
  Vec<Scalar> values;
  Mat<Scalar> vectors;
};

// True while double-precision eigen and singular value calls go through
// LAPACK. Becomes false for the rest of the process once a LAPACK result
// fails its consistency check; Eigen is used from then on.
bool lapack_in_use();

namespace internal {

// Implemented in linalg.cpp. Return false when the library was built
// without LAPACKE or LAPACK has been disabled, in which case the caller
// falls back to Eigen.
bool LapackSymmetricEigen(const Matrix& a, bool compute_vectors,
                          SymmetricEigen<double>& out);
bool LapackSingularValues(const Matrix& a, Vector& out);

template <typename Derived>
void RequireSquare(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " requires a square matrix, got " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace internal

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " contains NaN or Inf entries");
  }
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = static_cast<double>(a.norm());
  if (scale == 0.0) return true;
  return static_cast<double>((a - a.transpose()).norm()) <= rel_tol * scale;
}

template <typename Derived>
void RequireSymmetric(const Eigen::MatrixBase<Derived>& a,
                      const ToleranceConfig& tol, const char* what) {
  internal::RequireSquare(a, what);
  if (!is_symmetric(a, tol.sym_tol)) {
    throw Error(ErrorCode::kNotSymmetric,
                std::string(what) + " input is not symmetric within sym_tol");
  }
}

template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eigen(
    const Eigen::MatrixBase<Derived>& a, bool compute_vectors = true,
    EigenBackend backend = EigenBackend::kAuto) {
  using Scalar = typename Derived::Scalar;
  internal::RequireSquare(a, "symmetric_eigen");
  SymmetricEigen<Scalar> out;
  if constexpr (std::is_same_v<Scalar, double>) {
    if (backend == EigenBackend::kAuto && a.rows() > 0 &&
        internal::LapackSymmetricEigen(a.eval(), compute_vectors, out)) {
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(
      a, compute_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNoConvergence,
                "symmetric eigensolver failed to converge");
  }
  out.values = solver.eigenvalues();
  if (compute_vectors) out.vectors = solver.eigenvectors();
  return out;
}

// Singular values in descending order.
template <typename Derived>
Vec<typename Derived::Scalar> singular_values(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if constexpr (std::is_same_v<Scalar, double>) {
    Vector out;
    if (a.size() > 0 && internal::LapackSingularValues(a.eval(), out)) {
      return out;
    }
  }
  Eigen::BDCSVD<Mat<Scalar>> svd(a.eval());
  return svd.singularValues();
}

// Lower-triangular L with L * L^T = a.
template <typename Derived>
Mat<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& a,
                                       const ToleranceConfig& tol = {}) {
  using Scalar = typename Derived::Scalar;
  RequireSymmetric(a, tol, "cholesky");
  Eigen::LLT<Mat<Scalar>, Eigen::Lower> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "non-positive pivot encountered during Cholesky elimination");
  }
  Mat<Scalar> l = llt.matrixL();
  return l;
}

// Square roots of an ascending spectrum with small negative eigenvalues
// clamped to zero. Throws NotPSD when an eigenvalue is clearly negative.
template <typename Scalar>
Vec<Scalar> clamped_sqrt_spectrum(const Vec<Scalar>& values,
                                  const ToleranceConfig& tol = {}) {
  if (values.size() == 0) return values;
  const Scalar scale = values.cwiseAbs().maxCoeff();
  const Scalar floor = -static_cast<Scalar>(tol.eig_clamp) * scale;
  if (values.minCoeff() < floor) {
    throw Error(ErrorCode::kNotPSD,
                "eigenvalue " + std::to_string(static_cast<double>(values.minCoeff())) +
                    " below clamp threshold");
  }
  return values.cwiseMax(Scalar(0)).cwiseSqrt();
}

// Symmetric R with R * R = a.
template <typename Derived>
Mat<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& a,
                                       const ToleranceConfig& tol = {}) {
  using Scalar = typename Derived::Scalar;
  RequireSymmetric(a, tol, "psd_sqrt");
  if (a.rows() == 0) return Mat<Scalar>(0, 0);
  const auto eig = symmetric_eigen(a);
  const Vec<Scalar> root = clamped_sqrt_spectrum(eig.values, tol);
  Mat<Scalar> r = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  return (r + r.transpose()) / Scalar(2);
}

// Moore-Penrose pseudoinverse; singular values below rcond * sigma_max are
// treated as zero.
template <typename Derived>
Mat<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a,
                                   const ToleranceConfig& tol = {}) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return Mat<Scalar>::Zero(a.cols(), a.rows());
  // BDCSVD in Eigen 3.4.0 returns inaccurate vectors for matrices with
  // clustered singular values (tree encoders hit this), so use Jacobi.
  Eigen::JacobiSVD<Mat<Scalar>> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec<Scalar>& sigma = svd.singularValues();
  const Scalar sigma_max = sigma.size() > 0 ? sigma(0) : Scalar(0);
  const Scalar cutoff = static_cast<Scalar>(tol.rcond_for<Scalar>(a.rows())) * sigma_max;
  Vec<Scalar> inv = Vec<Scalar>::Zero(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > Scalar(0)) inv(i) = Scalar(1) / sigma(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Forward substitution; entries of `l` above the diagonal are ignored.
template <typename DerivedL, typename DerivedB>
Mat<typename DerivedL::Scalar> tri_solve_lower(
    const Eigen::MatrixBase<DerivedL>& l, const Eigen::MatrixBase<DerivedB>& b) {
  internal::RequireSquare(l, "tri_solve_lower");
  if (b.rows() != l.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tri_solve_lower: right-hand side has wrong row count");
  }
  for (Index i = 0; i < l.rows(); ++i) {
    if (l(i, i) == 0) {
      throw Error(ErrorCode::kSingularMatrix,
                  "zero on the diagonal at row " + std::to_string(i));
    }
  }
  return l.template triangularView<Eigen::Lower>().solve(b);
}

// Largest l2 column norm (the sensitivity of x -> h x under singleton
// adjacency).
template <typename Derived>
typename Derived::Scalar max_column_norm(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  if (h.cols() == 0 || h.rows() == 0) return Scalar(0);
  return h.colwise().norm().maxCoeff();
}

template <typename DerivedA, typename DerivedB>
double relative_frobenius_error(const Eigen::MatrixBase<DerivedA>& approx,
                                const Eigen::MatrixBase<DerivedB>& exact) {
  const double denom = static_cast<double>(exact.norm());
  const double num = static_cast<double>((approx - exact).norm());
  return denom == 0.0 ? num : num / denom;
}

}  // namespace dppf

#endif  // DPPF_LINALG_HPP_
