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

#include "dppf/mechanism.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dppf/operators.hpp"
#include "dppf/random.hpp"

namespace dppf {
namespace {

void RequirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidPrivacyParams, std::string(name) + " must be positive and finite");
  }
}

// Depth-first walk over signed supports. The running quadratic form
// q = delta^T G delta and u = G delta are updated one coordinate at a time.
class SupportSearch {
 public:
  SupportSearch(const Matrix& gram, const AdjacencySet& adj)
      : g_(gram), adj_(adj), u_(Vector::Zero(gram.rows())) {}

  double run() {
    Visit(0, 0, 0.0);
    return best_;
  }

 private:
  Index NextStart(Index i) const {
    switch (adj_.kind) {
      case AdjacencyKind::kMinGap: return i + adj_.tau;
      case AdjacencyKind::kFixedWindows: return (i / adj_.window + 1) * adj_.window;
      default: return i + 1;
    }
  }

  int MaxSize() const {
    return adj_.kind == AdjacencyKind::kKParticipations ? adj_.k : static_cast<int>(adj_.n);
  }

  void Visit(Index start, int size, double q) {
    const double z = adj_.zeta;
    for (Index i = start; i < adj_.n; ++i) {
      // The first coordinate's sign is fixed: -delta has the same norm.
      const int signs = size == 0 ? 1 : 2;
      for (int s = 0; s < signs; ++s) {
        const double step = (s == 0 ? 1.0 : -1.0) * z;
        const double q_next = q + 2.0 * step * u_(i) + step * step * g_(i, i);
        best_ = std::max(best_, q_next);
        if (size + 1 < MaxSize()) {
          u_ += step * g_.col(i);
          Visit(NextStart(i), size + 1, q_next);
          u_ -= step * g_.col(i);
        }
      }
    }
  }

  const Matrix& g_;
  const AdjacencySet& adj_;
  Vector u_;
  double best_ = 0.0;
};

double Binomial(Index n, Index k) {
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

void RequireEnumerable(const AdjacencySet& adj) {
  const double count = candidate_count(adj);
  if (count > kBruteForceCap) {
    throw Error(ErrorCode::kTooLargeForBruteForce,
                "adjacency family has " + std::to_string(count) + " candidate deltas (cap 2^24)");
  }
}

// Largest delta^T G delta over the family.
double MaxQuadraticForm(const Matrix& gram, const AdjacencySet& adj) {
  if (gram.rows() != adj.n) {
    throw Error(ErrorCode::kDimensionMismatch, "adjacency dimension does not match the matrix");
  }
  switch (adj.kind) {
    case AdjacencyKind::kSingletons:
      return adj.zeta * adj.zeta * gram.diagonal().maxCoeff();
    case AdjacencyKind::kExplicit: {
      double best = 0.0;
      for (const Vector& d : adj.deltas) best = std::max(best, d.dot(gram * d));
      return best;
    }
    default:
      RequireEnumerable(adj);
      return SupportSearch(gram, adj).run();
  }
}

}  // namespace

double calibrate_sigma(double gamma, double zeta, double epsilon, double delta) {
  RequirePositive(gamma, "gamma");
  RequirePositive(zeta, "zeta");
  RequirePositive(epsilon, "epsilon");
  RequirePositive(delta, "delta");
  if (!(delta < 1.0)) throw Error(ErrorCode::kInvalidPrivacyParams, "delta must be < 1");
  return 2.0 * gamma * zeta * std::sqrt(std::log(1.0 / delta)) / epsilon;
}

PrivacyParams make_privacy_params(double gamma, double zeta, double epsilon, double delta) {
  PrivacyParams p;
  p.gamma = gamma;
  p.zeta = zeta;
  p.epsilon = epsilon;
  p.delta = delta;
  p.sigma = calibrate_sigma(gamma, zeta, epsilon, delta);
  return p;
}

double rdp_epsilon(double alpha, double gamma, double sigma) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::kInvalidPrivacyParams, "alpha must be > 1");
  RequirePositive(sigma, "sigma");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::kInvalidPrivacyParams, "gamma must be >= 0");
  return alpha * gamma * gamma / (2.0 * sigma * sigma);
}

int tree_levels(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "tree_levels: n must be >= 1");
  // ceil(log2(n + 1)) is the bit length of n.
  return static_cast<int>(std::bit_width(n));
}

double tree_equivalent_sigma(double gamma, double sigma_tree, std::uint64_t n) {
  RequirePositive(gamma, "gamma");
  RequirePositive(sigma_tree, "sigma_tree");
  return gamma * sigma_tree / std::sqrt(static_cast<double>(tree_levels(n)));
}

Vector gaussian_noise(Index m, double sigma, std::uint64_t seed, std::uint64_t replicate) {
  Vector z(m);
  const std::uint64_t base = replicate * static_cast<std::uint64_t>(m);
  for (Index i = 0; i < m; ++i) z(i) = sigma * CounterGaussian(seed, base + static_cast<std::uint64_t>(i));
  return z;
}

MechanismRun run_mechanism(const Matrix& w, const Matrix& h, const Vector& x,
                           const PrivacyParams& priv, std::uint64_t seed,
                           const std::optional<Vector>& noise_override) {
  const Index n = x.size();
  if (w.rows() != n || h.cols() != n || w.cols() != h.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "run_mechanism: need w (n x m), h (m x n), x (n)");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(std::abs(x(i)) <= priv.zeta)) {
      throw Error(ErrorCode::kInputOutOfRange,
                  "x[" + std::to_string(i) + "] = " + std::to_string(x(i)) + " exceeds zeta");
    }
  }
  if (!(relative_frobenius_error(w * h, prefix_sum_matrix(n)) <= 1e-8)) {
    throw Error(ErrorCode::kNonFactorization, "run_mechanism: w * h is not the prefix-sum operator");
  }
  const double gamma = max_column_norm(h);
  if (!(std::abs(gamma - priv.gamma) <= 1e-9 * std::max(1.0, gamma))) {
    throw Error(ErrorCode::kInvalidPrivacyParams, "priv.gamma differs from the column norm of h");
  }

  MechanismRun run;
  run.seed = seed;
  if (noise_override) {
    if (noise_override->size() != h.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "noise override must have one entry per measurement");
    }
    run.noise_used = *noise_override;
  } else {
    RequirePositive(priv.sigma, "sigma");
    run.noise_used = gaussian_noise(h.rows(), priv.sigma, seed);
  }

  run.true_prefix.resize(n);
  double acc = 0.0;
  for (Index t = 0; t < n; ++t) run.true_prefix(t) = (acc += x(t));

  run.releases.resize(n);
  if (is_streaming_pair(w, h)) {
    // Measurement j becomes available at step last(j).
    const std::vector<Index> last = last_nonzero_columns(h);
    std::vector<std::vector<Index>> ready(static_cast<size_t>(n));
    for (Index j = 0; j < h.rows(); ++j) {
      ready[static_cast<size_t>(std::max<Index>(last[static_cast<size_t>(j)], 0))].push_back(j);
    }
    Vector measured = Vector::Zero(h.rows());
    std::vector<Index> formed;
    for (Index t = 0; t < n; ++t) {
      for (Index j : ready[static_cast<size_t>(t)]) {
        measured(j) = h.row(j).head(t + 1).dot(x.head(t + 1)) + run.noise_used(j);
        formed.push_back(j);
      }
      double y = 0.0;
      for (Index j : formed) y += w(t, j) * measured(j);
      run.releases(t) = y;
    }
  } else {
    run.releases = w * (h * x + run.noise_used);
  }
  run.noise_component = w * run.noise_used;
  return run;
}

MonteCarloStats monte_carlo_error(const Matrix& w, double sigma, long long replicates,
                                  std::uint64_t seed) {
  if (replicates < 1) throw Error(ErrorCode::kInvalidArgument, "monte_carlo_error: replicates must be >= 1");
  const Index m = w.cols();
  const long long batch = 1024;
  MonteCarloStats st;
  st.replicates = replicates;
  st.per_step_variance = Vector::Zero(w.rows());
  double total = 0.0;
  for (long long r0 = 0; r0 < replicates; r0 += batch) {
    const long long cnt = std::min(batch, replicates - r0);
    Matrix z(m, cnt);
    for (long long c = 0; c < cnt; ++c) {
      z.col(c) = gaussian_noise(m, sigma, seed, static_cast<std::uint64_t>(r0 + c));
    }
    const Matrix y = w * z;
    total += y.squaredNorm();
    st.per_step_variance += y.rowwise().squaredNorm();
  }
  st.mean_total_sq_error = total / static_cast<double>(replicates);
  st.per_step_variance /= static_cast<double>(replicates);
  return st;
}

AdjacencySet AdjacencySet::singletons(Index n, double zeta) {
  AdjacencySet a;
  a.kind = AdjacencyKind::kSingletons;
  a.n = n;
  a.zeta = zeta;
  return a;
}

AdjacencySet AdjacencySet::explicit_deltas(Index n, std::vector<Vector> deltas) {
  AdjacencySet a;
  a.kind = AdjacencyKind::kExplicit;
  a.n = n;
  a.zeta = 0.0;
  for (const Vector& d : deltas) {
    if (d.size() != n) throw Error(ErrorCode::kDimensionMismatch, "explicit delta has wrong length");
    require_finite(d, "explicit delta");
    if (d.size() > 0) a.zeta = std::max(a.zeta, d.cwiseAbs().maxCoeff());
  }
  a.deltas = std::move(deltas);
  return a;
}

AdjacencySet AdjacencySet::k_participations(Index n, int k, double zeta) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k_participations: k must be >= 1");
  AdjacencySet a;
  a.kind = AdjacencyKind::kKParticipations;
  a.n = n;
  a.k = k;
  a.zeta = zeta;
  return a;
}

AdjacencySet AdjacencySet::min_gap(Index n, Index tau, double zeta) {
  if (tau < 1) throw Error(ErrorCode::kInvalidArgument, "min_gap: tau must be >= 1");
  AdjacencySet a;
  a.kind = AdjacencyKind::kMinGap;
  a.n = n;
  a.tau = tau;
  a.zeta = zeta;
  return a;
}

AdjacencySet AdjacencySet::fixed_windows(Index n, Index window, double zeta) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "fixed_windows: window must be >= 1");
  AdjacencySet a;
  a.kind = AdjacencyKind::kFixedWindows;
  a.n = n;
  a.window = window;
  a.zeta = zeta;
  return a;
}

double candidate_count(const AdjacencySet& adj) {
  const Index n = adj.n;
  switch (adj.kind) {
    case AdjacencyKind::kSingletons: return static_cast<double>(n);
    case AdjacencyKind::kExplicit: return static_cast<double>(adj.deltas.size());
    case AdjacencyKind::kKParticipations: {
      double c = 0.0;
      for (Index s = 1; s <= std::min<Index>(adj.k, n); ++s) c += Binomial(n, s) * std::ldexp(1.0, static_cast<int>(s - 1));
      return c;
    }
    case AdjacencyKind::kMinGap: {
      // g[i]: patterns whose last participation is i, first sign fixed.
      std::vector<double> g(static_cast<size_t>(n), 0.0);
      double total = 0.0;
      double prefix = 0.0;  // sum of g[j] for j <= i - tau
      for (Index i = 0; i < n; ++i) {
        if (i - adj.tau >= 0) prefix += g[static_cast<size_t>(i - adj.tau)];
        g[static_cast<size_t>(i)] = 1.0 + 2.0 * prefix;
        total += g[static_cast<size_t>(i)];
      }
      return total;
    }
    case AdjacencyKind::kFixedWindows: {
      double prod = 1.0;
      for (Index start = 0; start < n; start += adj.window) {
        prod *= 1.0 + 2.0 * static_cast<double>(std::min(adj.window, n - start));
      }
      return (prod - 1.0) / 2.0;
    }
  }
  return 0.0;
}

double generalized_sensitivity(const Matrix& h, const AdjacencySet& adj) {
  if (h.cols() != adj.n) {
    throw Error(ErrorCode::kDimensionMismatch, "generalized_sensitivity: h columns must equal adjacency n");
  }
  if (adj.kind == AdjacencyKind::kSingletons) return max_column_norm(h) * adj.zeta;
  if (adj.kind == AdjacencyKind::kExplicit) {
    double best = 0.0;
    for (const Vector& d : adj.deltas) best = std::max(best, (h * d).norm());
    return best;
  }
  RequireEnumerable(adj);
  const Matrix gram = h.transpose() * h;
  return std::sqrt(std::max(0.0, MaxQuadraticForm(gram, adj)));
}

bool check_quadratic_form(const Matrix& x, const AdjacencySet& adj) {
  internal::RequireSquare(x, "check_quadratic_form");
  return MaxQuadraticForm(x, adj) <= 1.0 + 1e-9;
}

}  // namespace dppf
