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

#ifndef DPPF_MECHANISM_HPP_
#define DPPF_MECHANISM_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "dppf/linalg.hpp"

namespace dppf {

// Gaussian noise scale for releasing H x with per-entry bound zeta under
// replace-one adjacency: sigma = 2 gamma zeta sqrt(ln(1/delta)) / epsilon.
double calibrate_sigma(double gamma, double zeta, double epsilon, double delta);

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 1e-6;
  double zeta = 1.0;
  double gamma = 1.0;
  double sigma = 0.0;
};

PrivacyParams make_privacy_params(double gamma, double zeta, double epsilon, double delta);

// Renyi DP of order alpha for the Gaussian mechanism: alpha gamma^2 / (2 sigma^2).
double rdp_epsilon(double alpha, double gamma, double sigma);

// ceil(log2(n + 1)), the number of tree levels touched by one leaf.
int tree_levels(std::uint64_t n);

// Noise scale for a factorization with sensitivity gamma that matches the
// RDP guarantee of tree aggregation run at sigma_tree.
double tree_equivalent_sigma(double gamma, double sigma_tree, std::uint64_t n);

struct MechanismRun {
  Vector releases;
  Vector true_prefix;
  Vector noise_used;       // z, one entry per measurement
  Vector noise_component;  // W z, one entry per release
  std::uint64_t seed = 0;
};

// Releases W (H x + z), z ~ N(0, sigma^2 I), for W H equal to the prefix-sum
// operator. Measurements are formed as soon as all their inputs are known
// and release t only reads measurements formed by step t when the pair is
// streaming. `noise_override` replaces z (already scaled) when given.
MechanismRun run_mechanism(const Matrix& w, const Matrix& h, const Vector& x,
                           const PrivacyParams& priv, std::uint64_t seed,
                           const std::optional<Vector>& noise_override = std::nullopt);

// z for replicate `replicate` of stream `seed`: entries sigma N(0, 1) drawn
// at counters replicate * m + i.
Vector gaussian_noise(Index m, double sigma, std::uint64_t seed, std::uint64_t replicate = 0);

struct MonteCarloStats {
  double mean_total_sq_error = 0.0;  // mean of ||W z||^2
  Vector per_step_variance;          // empirical E[(W z)_t^2]
  long long replicates = 0;
};

MonteCarloStats monte_carlo_error(const Matrix& w, double sigma, long long replicates,
                                  std::uint64_t seed);

enum class AdjacencyKind { kSingletons, kExplicit, kKParticipations, kMinGap, kFixedWindows };

struct AdjacencySet {
  AdjacencyKind kind = AdjacencyKind::kSingletons;
  Index n = 0;
  double zeta = 1.0;
  int k = 1;           // kKParticipations
  Index tau = 1;       // kMinGap: participations at least tau steps apart
  Index window = 1;    // kFixedWindows: at most one participation per block of this length
  std::vector<Vector> deltas;  // kExplicit

  static AdjacencySet singletons(Index n, double zeta = 1.0);
  static AdjacencySet explicit_deltas(Index n, std::vector<Vector> deltas);
  static AdjacencySet k_participations(Index n, int k, double zeta = 1.0);
  static AdjacencySet min_gap(Index n, Index tau, double zeta = 1.0);
  static AdjacencySet fixed_windows(Index n, Index window, double zeta = 1.0);
};

constexpr double kBruteForceCap = 16777216.0;  // 2^24 candidate deltas

// Candidate deltas up to a global sign (delta and -delta give the same norm).
double candidate_count(const AdjacencySet& adj);

// sup over the family of ||H delta||_2.
double generalized_sensitivity(const Matrix& h, const AdjacencySet& adj);

// True iff delta^T X delta <= 1 + 1e-9 for every delta in the family.
bool check_quadratic_form(const Matrix& x, const AdjacencySet& adj);

}  // namespace dppf

#endif  // DPPF_MECHANISM_HPP_
