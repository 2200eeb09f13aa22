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

#include "dppf/structured.hpp"

#include <cmath>

#include "dppf/random.hpp"

namespace dppf {
namespace {

// Ridge update of every row of `x` with the other factor `y` held fixed:
//   x_i = (sum_j m_ij y_j y_j^T + reg I)^{-1} sum_j m_ij t_ij y_j.
// The per-row Gram matrices come from one product m * [y_p .* y_q].
void UpdateFactor(const Matrix& target, const Matrix& mask, const Matrix& y, double reg,
                  Matrix& x) {
  const Index n = target.rows();
  const Index r = y.cols();
  const Index pairs = r * (r + 1) / 2;
  Matrix products(y.rows(), pairs);
  Index c = 0;
  for (Index p = 0; p < r; ++p) {
    for (Index q = p; q < r; ++q) products.col(c++) = y.col(p).cwiseProduct(y.col(q));
  }
  const Matrix grams = mask * products;
  const Matrix rhs = mask.cwiseProduct(target) * y;
  Matrix g(r, r);
  for (Index i = 0; i < n; ++i) {
    c = 0;
    for (Index p = 0; p < r; ++p) {
      for (Index q = p; q < r; ++q) {
        g(p, q) = grams(i, c);
        g(q, p) = grams(i, c);
        ++c;
      }
    }
    g.diagonal().array() += reg;
    x.row(i) = g.llt().solve(rhs.row(i).transpose()).transpose();
  }
}

Matrix GaussianMatrix(Index rows, Index cols, double scale, std::uint64_t seed,
                      std::uint64_t offset) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = scale * CounterGaussian(seed, offset + static_cast<std::uint64_t>(i * cols + j));
    }
  }
  return m;
}

}  // namespace

Matrix standard_mask(Index n, Index d) {
  Matrix m = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + d; i < n; ++i) m(i, j) = 1.0;
  }
  return m;
}

BandSplit band_split(const Matrix& w, Index d) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::kDimensionMismatch, "band_split: w must be square");
  if (d < 0 || d > w.rows()) throw Error(ErrorCode::kInvalidArgument, "band_split: need 0 <= d <= n");
  const Index n = w.rows();
  BandSplit out{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Index off = i - j;
      if (off >= 0 && off < d) {
        out.band(i, j) = w(i, j);
      } else if (w(i, j) != 0.0) {
        out.mask(i, j) = 1.0;
      }
    }
  }
  return out;
}

double als_objective(const Matrix& w, const Matrix& mask, const Matrix& a, const Matrix& b,
                     double reg) {
  const Matrix resid = mask.cwiseProduct(a * b.transpose() - w);
  return resid.squaredNorm() + reg * (a.squaredNorm() + b.squaredNorm());
}

AlsResult als_fit(const Matrix& w, const Matrix& mask, Index r, const AlsConfig& cfg) {
  if (r < 1) throw Error(ErrorCode::kInvalidArgument, "als_fit: rank must be >= 1");
  if (!(cfg.reg > 0.0)) throw Error(ErrorCode::kInvalidArgument, "als_fit: reg must be > 0");
  if (cfg.sweeps < 1) throw Error(ErrorCode::kInvalidArgument, "als_fit: sweeps must be >= 1");
  if (mask.rows() != w.rows() || mask.cols() != w.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "als_fit: mask shape must match w");
  }
  AlsResult out;
  out.a = GaussianMatrix(w.rows(), r, cfg.init_scale, cfg.seed, 0);
  out.b = GaussianMatrix(w.cols(), r, cfg.init_scale, cfg.seed,
                         static_cast<std::uint64_t>(w.rows() * r));
  out.objective.push_back(als_objective(w, mask, out.a, out.b, cfg.reg));
  const Matrix wt = w.transpose();
  const Matrix mt = mask.transpose();
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    UpdateFactor(w, mask, out.b, cfg.reg, out.a);
    UpdateFactor(wt, mt, out.a, cfg.reg, out.b);
    out.objective.push_back(als_objective(w, mask, out.a, out.b, cfg.reg));
  }
  return out;
}

StructuredW fit_structured(const Matrix& w, Index d, Index r, const AlsConfig& cfg) {
  BandSplit split = band_split(w, d);
  AlsResult fit = als_fit(w, split.mask, r, cfg);
  StructuredW sw;
  sw.n = w.rows();
  sw.d = d;
  sw.r = r;
  sw.band = std::move(split.band);
  sw.mask = std::move(split.mask);
  sw.a = std::move(fit.a);
  sw.b = std::move(fit.b);
  sw.reg = cfg.reg;
  sw.seed = cfg.seed;
  sw.sweeps = cfg.sweeps;
  return sw;
}

Matrix assemble(const StructuredW& sw) {
  if (sw.band.rows() != sw.n || sw.band.cols() != sw.n || sw.mask.rows() != sw.n ||
      sw.mask.cols() != sw.n || sw.a.rows() != sw.n || sw.b.rows() != sw.n ||
      sw.a.cols() != sw.b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "assemble: inconsistent StructuredW shapes");
  }
  return (sw.a * sw.b.transpose()).cwiseProduct(sw.mask) + sw.band;
}

LossReport efficient_loss(const StructuredW& sw, const Matrix& s) {
  const Matrix w_hat = assemble(sw);
  if (s.rows() != sw.n || s.cols() != sw.n) {
    throw Error(ErrorCode::kDimensionMismatch, "efficient_loss: s must be n x n");
  }
  const Vector diag = w_hat.diagonal().cwiseAbs();
  const bool lower = w_hat.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0);
  Matrix h;
  if (lower && diag.minCoeff() > 1e-12 * diag.maxCoeff()) {
    h = w_hat.triangularView<Eigen::Lower>().solve(s);
  } else {
    h = pinv(w_hat) * s;
  }
  const double residual = relative_frobenius_error(w_hat * h, s);
  if (!(residual <= 1e-6)) {
    throw Error(ErrorCode::kInfeasibleFactorization,
                "efficient_loss: W_hat is rank deficient (residual " + std::to_string(residual) + ")");
  }
  return loss_of(w_hat, h);
}

NoiseStreamState start_noise_stream(const StructuredW& sw, Index width) {
  if (width < 1) throw Error(ErrorCode::kInvalidArgument, "noise stream width must be >= 1");
  assemble(sw);  // shape validation
  if (sw.mask != standard_mask(sw.n, sw.d)) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise stream needs the mask with ones exactly where i - j >= d");
  }
  NoiseStreamState st;
  st.beta = Matrix::Zero(sw.r, width);
  st.width = width;
  return st;
}

Eigen::RowVectorXd noise_stream_step(const StructuredW& sw, NoiseStreamState& state,
                                     const Eigen::RowVectorXd& z_t) {
  if (state.step >= sw.n) throw Error(ErrorCode::kStreamExhausted, "noise stream already produced n outputs");
  if (z_t.size() != state.width) throw Error(ErrorCode::kDimensionMismatch, "noise row has wrong width");
  const Index i = state.step;
  const Index d = sw.d;
  long long mults = 0;

  // Fold the noise row that just left the band into the accumulator.
  if (i >= d) {
    const Index j = i - d;
    if (d == 0) {
      state.beta += sw.b.row(j).transpose() * z_t;
    } else {
      state.beta += sw.b.row(j).transpose() * state.recent_noise.front();
      state.recent_noise.pop_front();
    }
    mults += sw.r;
  }
  if (d > 0) state.recent_noise.push_back(z_t);

  Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(state.width);
  // recent_noise.back() is z_i, the element before it z_{i-1}, and so on.
  const Index kept = static_cast<Index>(state.recent_noise.size());
  for (Index k = 0; k < kept; ++k) {
    y += sw.band(i, i - k) * state.recent_noise[static_cast<size_t>(kept - 1 - k)];
    ++mults;
  }
  if (i >= d) {
    y += sw.a.row(i) * state.beta;
    mults += sw.r;
  }
  state.multiplies_last_step = mults;
  ++state.step;
  return y;
}

double noise_stream_step(const StructuredW& sw, NoiseStreamState& state, double z_t) {
  Eigen::RowVectorXd z(1);
  z(0) = z_t;
  return noise_stream_step(sw, state, z)(0);
}

}  // namespace dppf
