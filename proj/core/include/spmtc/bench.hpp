#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spmtc/io.hpp"
#include "spmtc/types.hpp"

namespace spmtc {

// Benchmark plan: data source, methods, hyperparameter grids, seeds.
// Default grids follow the reference evaluation protocol:
// l in {2,4,8,16}, lambda1 in {0.05, 0.10, ..., 0.95}, 20 seeds.
struct BenchPlan {
  std::string manifest_path;  // exactly one of manifest_path / synth_path
  std::string synth_path;
  std::vector<std::string> methods;  // subset of {km, all-km, lssmtc, spmtc-h, spmtc-s}
  std::vector<double> lambda1_grid;
  std::vector<int> l_grid;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int workers = 1;
  bool save_runs = true;  // per-run result directories under out/runs/

  static std::vector<double> default_lambda1_grid();
  static std::vector<int> default_l_grid();
  static std::vector<std::uint64_t> default_seeds();

  void validate() const;
};

BenchPlan read_bench_plan(const std::filesystem::path& path);

// One successful (method, grid point, seed, task) outcome.
struct BenchRow {
  std::string method;
  int task = 0;
  double lambda1 = 0.0;
  int l = 0;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double nmi = 0.0;
  double objective = 0.0;
  double wall_ms = 0.0;
};

// Per-task aggregate of one method at its best grid point.
struct MethodTaskSummary {
  std::string method;
  int task = 0;
  double lambda1 = 0.0;  // best grid point (shared across tasks of a method)
  int l = 0;
  double mean_acc = 0.0;
  double sd_acc = 0.0;
  double mean_nmi = 0.0;
  double sd_nmi = 0.0;
  double p_acc_vs_best = 1.0;  // Welch p against the column's best method
  double p_nmi_vs_best = 1.0;
  bool best_acc = false;  // best or statistically comparable at 5%
  bool best_nmi = false;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<MethodTaskSummary> summary;
  std::filesystem::path runs_csv;
  std::filesystem::path summary_md;
  std::vector<std::string> failures;  // one line per failed run
};

// Executes |methods| x |lambda1_grid| x |l_grid| x |seeds| runs (in up to
// plan.workers threads), writes runs.csv, summary.md, failures.log and
// per-run result directories, and returns everything in memory.
// Failed runs are excluded from aggregation; a method with zero
// successful runs aborts with an Error summarizing its failures.
BenchResult bench_run(const BenchPlan& plan);

// Fits one method on a problem. Methods: km (per-task Lloyd), all-km
// (pooled Lloyd), lssmtc (mode none), spmtc-h, spmtc-s.
RunResult run_method(const MultiTaskProblem& problem, const std::string& method,
                     double lambda1, int l, std::uint64_t seed);

}  // namespace spmtc
