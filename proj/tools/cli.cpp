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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dppf/io.hpp"
#include "dppf/linalg.hpp"
#include "dppf/mechanism.hpp"
#include "dppf/operators.hpp"
#include "dppf/solver.hpp"
#include "dppf/spectrum.hpp"
#include "dppf/streaming.hpp"
#include "dppf/structured.hpp"
#include "dppf/tree.hpp"

namespace dppf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Reads --config files written as JSON. Top-level keys name subcommands and
// hold an object of option values, e.g. {"table": {"sizes": [256, 512]}}.
class ConfigJSON : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    return Flatten(j, "", {});
  }

 private:
  static std::string Scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value " + v.dump());
  }

  static std::vector<CLI::ConfigItem> Flatten(const json& j, const std::string& name,
                                              std::vector<std::string> parents) {
    std::vector<CLI::ConfigItem> items;
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = Flatten(*it, it.key(), parents);
        items.insert(items.end(), sub.begin(), sub.end());
      }
      return items;
    }
    if (name.empty()) throw CLI::ConversionError("config must be a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      for (const json& v : j) item.inputs.push_back(Scalar(v));
    } else {
      item.inputs.push_back(Scalar(j));
    }
    items.push_back(std::move(item));
    return items;
  }
};

struct Options {
  Index n = 0;
  std::vector<Index> sizes;
  double rtol = 1e-5;
  std::vector<double> rtols{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  int max_iter = 10000;
  std::string init = "ones";
  std::vector<Index> d;
  std::vector<Index> r;
  double epsilon = 1.0;
  double delta = 1e-6;
  double zeta = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  bool efficient = false;
  bool lowerbound = false;
  std::string input;
  int sweeps = 50;
  double reg = 1e-6;
  std::string kind = "singletons";
  int k = 1;
  Index tau = 1;
  Index window = 1;
  std::string op = "optimal";
  std::string h_csv;
  std::string s_csv;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path OutDir(const Options& o, const std::string& command) {
  if (!o.out.empty()) return o.out;
  const char* root = std::getenv("DPPF_OUT_DIR");
  return fs::path(root && *root ? root : "dppf_out") / command;
}

SolverConfig MakeSolverConfig(const Options& o) {
  SolverConfig cfg;
  cfg.rtol = o.rtol;
  cfg.max_iter = o.max_iter;
  cfg.seed = o.seed;
  if (o.init == "random") {
    cfg.init = SolverInit::kRandom;
  } else if (o.init != "ones") {
    throw UsageError("--init must be 'ones' or 'random'");
  }
  return cfg;
}

struct OptimalPair {
  FixedPointResult fp;
  StreamingFactorization f;
};

OptimalPair SolveOptimal(Index n, const SolverConfig& cfg) {
  OptimalPair p;
  const Matrix s = prefix_sum_matrix(n);
  p.fp = solve(s, cfg);
  p.f = factorize_streaming(s, p.fp);
  return p;
}

std::string CsvLine(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const std::string& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  return line + '\n';
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
// exception is rethrown after all workers finish.
template <typename Fn>
void ParallelFor(size_t count, int jobs, Fn fn) {
  const size_t workers = std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(std::max(jobs, 1)), count));
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int CmdSolve(const Options& o, std::ostream& out) {
  const OptimalPair p = SolveOptimal(o.n, MakeSolverConfig(o));
  const fs::path dir = OutDir(o, "solve");
  write_matrix_csv(dir / "x_star.csv", p.fp.x_star);
  write_matrix_csv(dir / "w.csv", p.f.w);
  write_matrix_csv(dir / "h.csv", p.f.h);
  json j = to_json(p.fp);
  j["rtol"] = o.rtol;
  j["streaming"] = to_json(p.f.loss());
  write_json(dir / "result.json", j);
  out << "n=" << o.n << " root_loss=" << format_double(p.fp.root_loss())
      << " iterations=" << p.fp.iterations << " -> " << dir.string() << "\n";
  return kExitOk;
}

int CmdTable(const Options& o, std::ostream& out) {
  if (o.sizes.empty()) throw UsageError("--sizes is required");
  for (Index n : o.sizes) tree_height_for(n);
  if (o.efficient && (o.d.size() != o.sizes.size() || o.r.size() != o.sizes.size())) {
    throw UsageError("--efficient needs --d and --r lists aligned with --sizes");
  }
  struct Row {
    double honaker = 0, optimal = 0, efficient = 0, bound = 0;
  };
  std::vector<Row> rows(o.sizes.size());
  const SolverConfig cfg = MakeSolverConfig(o);
  ParallelFor(o.sizes.size(), o.jobs, [&](size_t i) {
    const Index n = o.sizes[i];
    Row& row = rows[i];
    row.honaker = honaker_below(tree_height_for(n)).loss().root_loss;
    const OptimalPair p = SolveOptimal(n, cfg);
    row.optimal = p.fp.root_loss();
    if (o.efficient) {
      AlsConfig als;
      als.seed = o.seed;
      als.sweeps = o.sweeps;
      als.reg = o.reg;
      const StructuredW sw = fit_structured(p.f.w, o.d[i], o.r[i], als);
      row.efficient = efficient_loss(sw, p.f.s).root_loss;
    }
    if (o.lowerbound) row.bound = std::sqrt(generic_lower_bound(p.f.s));
  });

  std::string csv = o.lowerbound ? "n,honaker,optimal,efficient,d,r,lower_bound\n"
                                 : "n,honaker,optimal,efficient,d,r\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    std::string line = std::to_string(o.sizes[i]) + ',' + format_double(rows[i].honaker) + ',' +
                       format_double(rows[i].optimal) + ',';
    if (o.efficient) {
      line += format_double(rows[i].efficient) + ',' + std::to_string(o.d[i]) + ',' +
              std::to_string(o.r[i]);
    } else {
      line += ",,";
    }
    if (o.lowerbound) line += ',' + format_double(rows[i].bound);
    csv += line + '\n';
    out << line << '\n';
  }
  const fs::path dir = OutDir(o, "table");
  write_text(dir / "table.csv", csv);
  return kExitOk;
}

int CmdVariance(const Options& o, std::ostream& out) {
  const int k = tree_height_for(o.n);
  const TreeFactorization tree = honaker_below(k);
  const OptimalPair p = SolveOptimal(o.n, MakeSolverConfig(o));
  const double sigma_tree = calibrate_sigma(tree.loss().gamma, o.zeta, o.epsilon, o.delta);
  const double sigma_opt = tree_equivalent_sigma(p.f.loss().gamma, sigma_tree,
                                                 static_cast<std::uint64_t>(o.n));
  const Vector v_tree = per_step_variance(tree.w, sigma_tree);
  const Vector v_opt = per_step_variance(p.f.w, sigma_opt);
  std::string csv = "t,honaker_below,optimal\n";
  for (Index t = 0; t < o.n; ++t) {
    csv += CsvLine({std::to_string(t + 1), format_double(v_tree(t)), format_double(v_opt(t))});
  }
  const fs::path dir = OutDir(o, "variance");
  write_text(dir / "variance.csv", csv);
  const json summary = {
      {"n", o.n},
      {"sigma_tree", sigma_tree},
      {"sigma_optimal", sigma_opt},
      {"honaker_below", {{"mean", v_tree.mean()}, {"max_over_min", v_tree.maxCoeff() / v_tree.minCoeff()}}},
      {"optimal", {{"mean", v_opt.mean()}, {"max_over_min", v_opt.maxCoeff() / v_opt.minCoeff()}}}};
  write_json(dir / "variance.json", summary);
  out << summary.dump() << '\n';
  return kExitOk;
}

int CmdRtolSweep(const Options& o, std::ostream& out) {
  const std::vector<RtolSweepRow> rows =
      rtol_sweep(prefix_sum_matrix(o.n), o.rtols, MakeSolverConfig(o));
  std::string csv = "rtol,loss,iterations\n";
  for (const RtolSweepRow& r : rows) {
    csv += CsvLine({format_double(r.rtol), format_double(r.loss), std::to_string(r.iterations)});
  }
  const fs::path dir = OutDir(o, "rtol-sweep");
  write_text(dir / "rtol_sweep.csv", csv);
  out << csv;
  return kExitOk;
}

int CmdApprox(const Options& o, std::ostream& out) {
  if (o.d.size() != 1 || o.r.size() != 1) throw UsageError("approx needs one --d and one --r");
  const OptimalPair p = SolveOptimal(o.n, MakeSolverConfig(o));
  AlsConfig als;
  als.seed = o.seed;
  als.sweeps = o.sweeps;
  als.reg = o.reg;
  const StructuredW sw = fit_structured(p.f.w, o.d[0], o.r[0], als);
  const LossReport eff = efficient_loss(sw, p.f.s);
  const fs::path dir = OutDir(o, "approx");
  save_structured(dir / "structured", sw);
  const json summary = {{"n", o.n},
                        {"d", o.d[0]},
                        {"r", o.r[0]},
                        {"optimal_root_loss", p.fp.root_loss()},
                        {"efficient", to_json(eff)}};
  write_json(dir / "approx.json", summary);
  out << summary.dump() << '\n';
  return kExitOk;
}

int CmdRun(const Options& o, std::ostream& out) {
  Vector x = Vector::Zero(o.n);
  if (!o.input.empty()) {
    x = read_vector_csv(o.input);
    if (x.size() != o.n) {
      throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(x.size()) +
                                                     " values, expected " + std::to_string(o.n));
    }
  }
  for (Index i = 0; i < x.size(); ++i) {
    if (!(std::abs(x(i)) <= o.zeta)) {
      throw Error(ErrorCode::kInputOutOfRange, "x[" + std::to_string(i) + "] exceeds zeta");
    }
  }
  const OptimalPair p = SolveOptimal(o.n, MakeSolverConfig(o));
  const PrivacyParams priv = make_privacy_params(max_column_norm(p.f.h), o.zeta, o.epsilon, o.delta);
  const MechanismRun run = run_mechanism(p.f.w, p.f.h, x, priv, o.seed);
  const fs::path dir = OutDir(o, "run");
  write_text(dir / "run.csv", mechanism_to_csv(run));
  write_json(dir / "run.json", to_json(priv, o.seed));
  out << "sigma=" << format_double(priv.sigma) << " -> " << dir.string() << '\n';
  return kExitOk;
}

Matrix SensitivityOperator(const Options& o) {
  if (!o.h_csv.empty()) return read_matrix_csv(o.h_csv);
  if (o.n < 1) throw UsageError("--n is required unless --h-csv is given");
  if (o.op == "identity") return Matrix::Identity(o.n, o.n);
  if (o.op == "prefix") return prefix_sum_matrix(o.n);
  if (o.op == "tree") return tree_matrix(tree_height_for(o.n)).matrix;
  if (o.op == "optimal") return SolveOptimal(o.n, MakeSolverConfig(o)).f.h;
  throw UsageError("--operator must be identity, prefix, tree or optimal");
}

int CmdSens(const Options& o, std::ostream& out) {
  const Matrix h = SensitivityOperator(o);
  const Index n = h.cols();
  AdjacencySet adj;
  if (o.kind == "singletons") {
    adj = AdjacencySet::singletons(n, o.zeta);
  } else if (o.kind == "k-participations") {
    adj = AdjacencySet::k_participations(n, o.k, o.zeta);
  } else if (o.kind == "min-gap") {
    adj = AdjacencySet::min_gap(n, o.tau, o.zeta);
  } else if (o.kind == "windows") {
    adj = AdjacencySet::fixed_windows(n, o.window, o.zeta);
  } else {
    throw UsageError("--kind must be singletons, k-participations, min-gap or windows");
  }
  const double sens = generalized_sensitivity(h, adj);
  const json j = {{"n", n},
                  {"kind", o.kind},
                  {"zeta", o.zeta},
                  {"candidates", candidate_count(adj)},
                  {"max_column_norm", max_column_norm(h)},
                  {"sensitivity", sens}};
  write_json(OutDir(o, "sens") / "sens.json", j);
  out << j.dump() << '\n';
  return kExitOk;
}

int CmdLowerBound(const Options& o, std::ostream& out) {
  json j;
  if (!o.s_csv.empty()) {
    const Matrix s = read_matrix_csv(o.s_csv);
    const double lb = generic_lower_bound(s);
    j = {{"n", s.rows()}, {"lower_bound", lb}, {"root_lower_bound", std::sqrt(lb)}};
  } else {
    if (o.n < 1) throw UsageError("--n or --s-csv is required");
    j = to_json(prefix_spectrum_report(o.n));
  }
  write_json(OutDir(o, "lowerbound") / "spectrum.json", j);
  json brief = j;
  brief.erase("singular_values");
  out << brief.dump() << '\n';
  return kExitOk;
}

void AddSolverFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--rtol", o.rtol, "Relative stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--init", o.init, "Initial vector: ones or random");
  cmd->add_option("--seed", o.seed, "Seed for random draws");
}

void AddPrivacyFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--epsilon", o.epsilon, "Privacy epsilon")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", o.delta, "Privacy delta")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--zeta", o.zeta, "Bound on |x_i|")->check(CLI::PositiveNumber);
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return kExitIo;
    case ErrorCode::kNoConvergence: return kExitNoConvergence;
    case ErrorCode::kInvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Matrix factorization mechanisms for private prefix sums"};
  app.config_formatter(std::make_shared<ConfigJSON>());
  app.set_config("--config", "", "JSON file with option values per subcommand");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", o.out, "Output directory (default $DPPF_OUT_DIR/<command>)");
  app.add_option("--jobs", o.jobs, "Parallel solves for table")->check(CLI::PositiveNumber);

  auto* solve_cmd = app.add_subcommand("solve", "Optimal streaming factorization of S(n)");
  solve_cmd->add_option("--n", o.n, "Size")->required()->check(CLI::PositiveNumber);
  AddSolverFlags(solve_cmd, o);

  auto* table_cmd = app.add_subcommand("table", "Root loss of tree, optimal and structured decoders");
  table_cmd->add_option("--sizes", o.sizes, "Sizes (powers of two)")->required()->check(CLI::PositiveNumber);
  table_cmd->add_option("--d", o.d, "Band widths aligned with --sizes")->check(CLI::NonNegativeNumber);
  table_cmd->add_option("--r", o.r, "Ranks aligned with --sizes")->check(CLI::PositiveNumber);
  table_cmd->add_flag("--efficient", o.efficient, "Fit the banded plus low-rank decoder");
  table_cmd->add_flag("--lowerbound", o.lowerbound, "Add the spectral lower bound column");
  table_cmd->add_option("--sweeps", o.sweeps, "ALS sweeps")->check(CLI::PositiveNumber);
  table_cmd->add_option("--reg", o.reg, "ALS ridge penalty")->check(CLI::PositiveNumber);
  AddSolverFlags(table_cmd, o);

  auto* var_cmd = app.add_subcommand("variance", "Per-step variance at equal privacy");
  var_cmd->add_option("--n", o.n, "Size (power of two)")->required()->check(CLI::PositiveNumber);
  AddPrivacyFlags(var_cmd, o);
  AddSolverFlags(var_cmd, o);

  auto* sweep_cmd = app.add_subcommand("rtol-sweep", "Loss against stopping tolerance");
  sweep_cmd->add_option("--n", o.n, "Size")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--rtols", o.rtols, "Descending tolerances")->check(CLI::PositiveNumber);
  AddSolverFlags(sweep_cmd, o);

  auto* approx_cmd = app.add_subcommand("approx", "Fit a banded plus low-rank decoder");
  approx_cmd->add_option("--n", o.n, "Size")->required()->check(CLI::PositiveNumber);
  approx_cmd->add_option("--d", o.d, "Band width")->required()->check(CLI::NonNegativeNumber);
  approx_cmd->add_option("--r", o.r, "Rank")->required()->check(CLI::PositiveNumber);
  approx_cmd->add_option("--sweeps", o.sweeps, "ALS sweeps")->check(CLI::PositiveNumber);
  approx_cmd->add_option("--reg", o.reg, "ALS ridge penalty")->check(CLI::PositiveNumber);
  AddSolverFlags(approx_cmd, o);

  auto* run_cmd = app.add_subcommand("run", "Run the optimal streaming mechanism");
  run_cmd->add_option("--n", o.n, "Size")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--input", o.input, "CSV with the n input values (default zeros)");
  AddPrivacyFlags(run_cmd, o);
  AddSolverFlags(run_cmd, o);

  auto* sens_cmd = app.add_subcommand("sens", "Sensitivity under an adjacency family");
  sens_cmd->add_option("--n", o.n, "Size")->check(CLI::PositiveNumber);
  sens_cmd->add_option("--operator", o.op, "identity, prefix, tree or optimal");
  sens_cmd->add_option("--h-csv", o.h_csv, "Encoder matrix CSV (overrides --operator)");
  sens_cmd->add_option("--kind", o.kind, "singletons, k-participations, min-gap or windows");
  sens_cmd->add_option("--k", o.k, "Participations")->check(CLI::PositiveNumber);
  sens_cmd->add_option("--tau", o.tau, "Minimum gap")->check(CLI::PositiveNumber);
  sens_cmd->add_option("--window", o.window, "Window length")->check(CLI::PositiveNumber);
  sens_cmd->add_option("--zeta", o.zeta, "Bound on |x_i|")->check(CLI::PositiveNumber);
  AddSolverFlags(sens_cmd, o);

  auto* lb_cmd = app.add_subcommand("lowerbound", "Spectral lower bound");
  lb_cmd->add_option("--n", o.n, "Size of the prefix-sum operator")->check(CLI::PositiveNumber);
  lb_cmd->add_option("--s-csv", o.s_csv, "Arbitrary square operator CSV");

  std::vector<std::string> argv_store{"dppf"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return CmdSolve(o, out);
    if (table_cmd->parsed()) return CmdTable(o, out);
    if (var_cmd->parsed()) return CmdVariance(o, out);
    if (sweep_cmd->parsed()) return CmdRtolSweep(o, out);
    if (approx_cmd->parsed()) return CmdApprox(o, out);
    if (run_cmd->parsed()) return CmdRun(o, out);
    if (sens_cmd->parsed()) return CmdSens(o, out);
    if (lb_cmd->parsed()) return CmdLowerBound(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NoConvergence& e) {
    err << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace dppf::cli
