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

#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "dppf/operators.hpp"
#include "dppf/solver.hpp"
#include "dppf/streaming.hpp"
#include "test_util.hpp"

namespace dppf {
namespace {

StructuredW RandomStructured(Index n, Index d, Index r, std::uint64_t seed) {
  StructuredW sw;
  sw.n = n;
  sw.d = d;
  sw.r = r;
  sw.band = band_split(testing::RandomMatrix(n, n, seed).triangularView<Eigen::Lower>(), d).band;
  sw.mask = standard_mask(n, d);
  sw.a = testing::RandomMatrix(n, r, seed + 1);
  sw.b = testing::RandomMatrix(n, r, seed + 2);
  return sw;
}

TEST(BandSplit, Extremes) {
  const Matrix s = prefix_sum_matrix(3);
  const BandSplit zero = band_split(s, 0);
  EXPECT_TRUE(zero.band.isZero(0.0));
  EXPECT_EQ(zero.mask, s);
  const BandSplit all = band_split(s, 3);
  EXPECT_EQ(all.band, s);
  EXPECT_TRUE(all.mask.isZero(0.0));
  const BandSplit one = band_split(s, 1);
  EXPECT_EQ(one.band, Matrix::Identity(3, 3));
  EXPECT_EQ(one.mask, standard_mask(3, 1));
}

TEST(BandSplit, ExactRecomposition) {
  const Matrix w = testing::RandomLower(20, 4);
  for (Index d : {0, 1, 3, 20}) {
    const BandSplit sp = band_split(w, d);
    EXPECT_EQ(Matrix(w.cwiseProduct(sp.mask) + sp.band), w) << "d=" << d;
  }
  EXPECT_THROW_CODE(band_split(w, 21), ErrorCode::kInvalidArgument);
  EXPECT_THROW_CODE(band_split(Matrix::Zero(2, 3), 0), ErrorCode::kDimensionMismatch);
}

TEST(AlsFit, RecoversRankOneTarget) {
  const Index n = 12;
  const Vector u = testing::RandomMatrix(n, 1, 3).col(0);
  const Vector v = testing::RandomMatrix(n, 1, 4).col(0);
  const Matrix mask = standard_mask(n, 2);
  const Matrix w = (u * v.transpose()).cwiseProduct(mask);
  AlsConfig cfg;
  cfg.reg = 1e-12;
  const AlsResult fit = als_fit(w, mask, 1, cfg);
  EXPECT_LE(mask.cwiseProduct(fit.a * fit.b.transpose() - w).norm(), 1e-6);
}

TEST(AlsFit, RidgeBiasScalesWithPenalty) {
  // Rows with a single observed entry are shrunk by about reg / b_j^2, so the
  // default penalty leaves a residual proportional to it.
  const Index n = 12;
  const Vector u = testing::RandomMatrix(n, 1, 3).col(0);
  const Vector v = testing::RandomMatrix(n, 1, 4).col(0);
  const Matrix mask = standard_mask(n, 2);
  const Matrix w = (u * v.transpose()).cwiseProduct(mask);
  double prev = std::numeric_limits<double>::infinity();
  for (double reg : {1e-4, 1e-6, 1e-8}) {
    AlsConfig cfg;
    cfg.reg = reg;
    const AlsResult fit = als_fit(w, mask, 1, cfg);
    const double resid = mask.cwiseProduct(fit.a * fit.b.transpose() - w).norm();
    EXPECT_LE(resid, 100.0 * reg) << "reg=" << reg;
    EXPECT_LT(resid, prev);
    prev = resid;
  }
}

TEST(AlsFit, EmptyMaskShrinksToZero) {
  const Matrix w = testing::RandomMatrix(6, 6, 1);
  const AlsResult fit = als_fit(w, Matrix::Zero(6, 6), 2);
  EXPECT_TRUE(fit.a.isZero(1e-12));
  EXPECT_TRUE(fit.b.isZero(1e-12));
}

TEST(AlsFit, ObjectiveNeverIncreases) {
  const Matrix w = testing::RandomLower(40, 9);
  const Matrix mask = standard_mask(40, 3);
  AlsConfig cfg;
  cfg.sweeps = 30;
  const AlsResult fit = als_fit(w, mask, 3, cfg);
  ASSERT_EQ(fit.objective.size(), 31u);
  for (size_t i = 1; i < fit.objective.size(); ++i) {
    EXPECT_LE(fit.objective[i], fit.objective[i - 1] * (1.0 + 1e-12)) << "sweep " << i;
  }
  EXPECT_DOUBLE_EQ(fit.objective.back(), als_objective(w, mask, fit.a, fit.b, cfg.reg));
}

TEST(AlsFit, ValidatesConfig) {
  const Matrix w = Matrix::Identity(3, 3);
  AlsConfig cfg;
  EXPECT_THROW_CODE(als_fit(w, w, 0, cfg), ErrorCode::kInvalidArgument);
  cfg.reg = 0.0;
  EXPECT_THROW_CODE(als_fit(w, w, 1, cfg), ErrorCode::kInvalidArgument);
  cfg = AlsConfig{};
  cfg.sweeps = 0;
  EXPECT_THROW_CODE(als_fit(w, w, 1, cfg), ErrorCode::kInvalidArgument);
  EXPECT_THROW_CODE(als_fit(w, Matrix::Ones(2, 2), 1), ErrorCode::kDimensionMismatch);
}

TEST(Assemble, BandOnlyAndZeroFactors) {
  const Matrix w = testing::RandomLower(5, 2);
  StructuredW sw;
  sw.n = 5;
  sw.d = 5;
  sw.r = 1;
  sw.band = w;
  sw.mask = Matrix::Zero(5, 5);
  sw.a = Matrix::Ones(5, 1);
  sw.b = Matrix::Ones(5, 1);
  EXPECT_EQ(assemble(sw), w);
  StructuredW z = RandomStructured(6, 2, 2, 7);
  z.a.setZero();
  EXPECT_EQ(assemble(z), z.band);
  z.a = Matrix::Zero(5, 2);
  EXPECT_THROW_CODE(assemble(z), ErrorCode::kDimensionMismatch);
}

TEST(EfficientLoss, ExactRepresentationOfOptimalDecoder) {
  const Index n = 32;
  const Matrix s = prefix_sum_matrix(n);
  const FixedPointResult r = solve(s);
  const StreamingFactorization f = factorize_streaming(s, r);
  StructuredW sw;
  sw.n = n;
  sw.d = n;
  sw.r = 1;
  sw.band = f.w;
  sw.mask = Matrix::Zero(n, n);
  sw.a = Matrix::Zero(n, 1);
  sw.b = Matrix::Zero(n, 1);
  EXPECT_REL_NEAR(efficient_loss(sw, s).loss, r.loss, 1e-6);
}

TEST(EfficientLoss, RankDeficientIsInfeasible) {
  StructuredW sw = RandomStructured(6, 1, 1, 3);
  sw.band(2, 2) = 0.0;
  sw.a.setZero();
  EXPECT_THROW_CODE(efficient_loss(sw, prefix_sum_matrix(6)), ErrorCode::kInfeasibleFactorization);
}

TEST(EfficientLoss, FittedDecoderNearOptimal) {
  const Matrix s = prefix_sum_matrix(256);
  const FixedPointResult r = solve(s);
  const StreamingFactorization f = factorize_streaming(s, r);
  const StructuredW sw = fit_structured(f.w, 4, 4);
  const LossReport rep = efficient_loss(sw, s);
  EXPECT_REL_NEAR(rep.root_loss, 40.4, 0.01);
  EXPECT_GE(rep.loss, r.loss * (1.0 - 1e-9));
}

TEST(NoiseStream, MatchesDenseProductOnRandomInstances) {
  std::mt19937_64 gen(20261014);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(1, 128)(gen);
    const Index d = std::uniform_int_distribution<Index>(0, std::min<Index>(8, n))(gen);
    const Index r = std::uniform_int_distribution<Index>(1, 8)(gen);
    const StructuredW sw = RandomStructured(n, d, r, 1000 + 3 * static_cast<std::uint64_t>(trial));
    const Vector z = testing::RandomMatrix(n, 1, 5000 + static_cast<std::uint64_t>(trial)).col(0);
    const Vector dense = assemble(sw) * z;
    NoiseStreamState st = start_noise_stream(sw);
    double max_err = 0.0;
    for (Index t = 0; t < n; ++t) {
      const double y = noise_stream_step(sw, st, z(t));
      max_err = std::max(max_err, std::abs(y - dense(t)));
      EXPECT_LE(st.multiplies_last_step, d + 2 * r) << "trial " << trial;
      EXPECT_EQ(static_cast<Index>(st.recent_noise.size()), std::min(t + 1, d));
    }
    EXPECT_LE(max_err, 1e-10 * std::max(1.0, dense.cwiseAbs().maxCoeff()))
        << "trial " << trial << " n=" << n << " d=" << d << " r=" << r;
  }
}

TEST(NoiseStream, VectorValuedRows) {
  const StructuredW sw = RandomStructured(30, 3, 2, 11);
  const Matrix z = testing::RandomMatrix(30, 4, 12);
  const Matrix dense = assemble(sw) * z;
  NoiseStreamState st = start_noise_stream(sw, 4);
  for (Index t = 0; t < 30; ++t) {
    const Eigen::RowVectorXd y = noise_stream_step(sw, st, Eigen::RowVectorXd(z.row(t)));
    EXPECT_LE((y - dense.row(t)).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_THROW_CODE(noise_stream_step(sw, st, Eigen::RowVectorXd(z.row(0))),
                    ErrorCode::kStreamExhausted);
}

TEST(NoiseStream, PureBandAndZeroNoise) {
  StructuredW sw = RandomStructured(10, 10, 2, 21);
  sw.a.setZero();
  sw.b.setZero();
  const Vector z = testing::RandomMatrix(10, 1, 22).col(0);
  NoiseStreamState st = start_noise_stream(sw);
  for (Index t = 0; t < 10; ++t) {
    double expected = 0.0;
    for (Index k = 0; k <= t; ++k) expected += sw.band(t, t - k) * z(t - k);
    EXPECT_NEAR(noise_stream_step(sw, st, z(t)), expected, 1e-12);
  }
  const StructuredW other = RandomStructured(16, 2, 3, 23);
  NoiseStreamState zs = start_noise_stream(other);
  for (Index t = 0; t < 16; ++t) EXPECT_EQ(noise_stream_step(other, zs, 0.0), 0.0);
}

TEST(NoiseStream, RejectsNonStandardMaskAndBadWidth) {
  StructuredW sw = RandomStructured(8, 2, 2, 31);
  EXPECT_THROW_CODE(start_noise_stream(sw, 0), ErrorCode::kInvalidArgument);
  NoiseStreamState st = start_noise_stream(sw, 2);
  EXPECT_THROW_CODE(noise_stream_step(sw, st, Eigen::RowVectorXd::Zero(3)),
                    ErrorCode::kDimensionMismatch);
  sw.mask(7, 0) = 0.0;
  EXPECT_THROW_CODE(start_noise_stream(sw), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace dppf
