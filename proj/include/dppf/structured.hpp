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

// Banded plus masked low-rank decoders
//
//   W_hat = (A B^T) .* M + D,
//
// where D keeps the first d diagonals of W and M selects the entries with
// i - j >= d. Noise W_hat z can then be generated online with O(d + r) work
// per step.

#ifndef DPPF_STRUCTURED_HPP_
#define DPPF_STRUCTURED_HPP_

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "dppf/linalg.hpp"
#include "dppf/loss.hpp"

namespace dppf {

struct StructuredW {
  Index n = 0;
  Index d = 0;
  Index r = 0;
  Matrix band;  // n x n, nonzero only for 0 <= i - j < d
  Matrix mask;  // n x n, 0/1
  Matrix a;     // n x r
  Matrix b;     // n x r
  // Fit metadata, carried through serialization.
  double reg = 0.0;
  std::uint64_t seed = 0;
  int sweeps = 0;
};

struct BandSplit {
  Matrix band;
  Matrix mask;
};

BandSplit band_split(const Matrix& w, Index d);

// Ones exactly where i - j >= d.
Matrix standard_mask(Index n, Index d);

struct AlsConfig {
  double reg = 1e-6;
  int sweeps = 50;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
};

struct AlsResult {
  Matrix a;
  Matrix b;
  // Objective at initialization followed by one value per sweep.
  std::vector<double> objective;
};

// Alternating ridge least squares on the entries selected by mask.
AlsResult als_fit(const Matrix& w, const Matrix& mask, Index r, const AlsConfig& cfg = {});

double als_objective(const Matrix& w, const Matrix& mask, const Matrix& a, const Matrix& b,
                     double reg);

// band_split followed by als_fit.
StructuredW fit_structured(const Matrix& w, Index d, Index r, const AlsConfig& cfg = {});

Matrix assemble(const StructuredW& sw);

// Loss of W_hat with the encoder H = W_hat^{-1} S that makes it exact.
LossReport efficient_loss(const StructuredW& sw, const Matrix& s);

// Sequential state for streaming W_hat z. Rows of z may be vectors of
// width m; the scalar case is m = 1.
struct NoiseStreamState {
  Matrix beta;                                // r x m, sum of z_j B[j, :]^T
  Index step = 0;
  std::deque<Eigen::RowVectorXd> recent_noise;  // last min(step, d) noise rows
  Index width = 1;
  long long multiplies_last_step = 0;
};

// Fresh state; requires the standard mask pattern.
NoiseStreamState start_noise_stream(const StructuredW& sw, Index width = 1);

Eigen::RowVectorXd noise_stream_step(const StructuredW& sw, NoiseStreamState& state,
                                     const Eigen::RowVectorXd& z_t);

double noise_stream_step(const StructuredW& sw, NoiseStreamState& state, double z_t);

}  // namespace dppf

#endif  // DPPF_STRUCTURED_HPP_
