#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "spmtc/bench.hpp"

using namespace spmtc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Drop the trailing wall_ms column from every runs.csv line.
std::string strip_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out << line.substr(0, comma) << "\n";
  }
  return out.str();
}

// One-task synthetic data source shared by several tests.
fs::path write_tiny_synth(const fs::path& dir, int m) {
  const fs::path spec = dir / "synth.txt";
  write_text(spec, "m = " + std::to_string(m) +
                       "\nd = 4\nc = 2\nl_true = 2\nn = 16\nseparation = 10\n"
                       "noise_sd = 1\ntask_offset = 0\noutlier_fraction = 0\nseed = 5\n");
  return spec;
}

BenchPlan tiny_plan(const fs::path& dir, int m) {
  BenchPlan plan;
  plan.synth_path = write_tiny_synth(dir, m).string();
  plan.methods = {"km", "lssmtc"};
  plan.lambda1_grid = {0.25, 0.5, 0.75};
  plan.l_grid = {2};
  plan.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) plan.seeds.push_back(s);
  plan.out_dir = (dir / "out").string();
  plan.save_runs = false;
  return plan;
}

}  // namespace

TEST_CASE("bench_run bookkeeping: 2 methods x 3 grid points x 20 seeds = 120 rows") {
  TempDir dir("spmtc_bench_rows");
  const BenchPlan plan = tiny_plan(dir.path, 1);
  const auto result = bench_run(plan);
  CHECK(result.rows.size() == 120);
  CHECK(result.failures.empty());
  CHECK(fs::exists(result.runs_csv));
  CHECK(fs::exists(result.summary_md));
}

TEST_CASE("bench_run summary equals a recomputation from the raw CSV") {
  TempDir dir("spmtc_bench_summary");
  BenchPlan plan = tiny_plan(dir.path, 2);
  const auto result = bench_run(plan);

  // Re-parse runs.csv.
  struct Key {
    std::string method;
    double lambda1;
    int l;
    bool operator<(const Key& o) const {
      return std::tie(method, lambda1, l) < std::tie(o.method, o.lambda1, o.l);
    }
  };
  std::map<Key, std::vector<double>> acc_by_point;          // pooled over tasks+seeds
  std::map<Key, std::vector<double>> nmi_by_point;
  std::map<std::pair<std::string, int>, std::map<Key, std::vector<double>>> acc_by_task;
  std::ifstream csv(result.runs_csv);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string method, task, lambda1, l, seed, acc, nmi, rest;
    std::getline(row, method, ',');
    std::getline(row, task, ',');
    std::getline(row, lambda1, ',');
    std::getline(row, l, ',');
    std::getline(row, seed, ',');
    std::getline(row, acc, ',');
    std::getline(row, nmi, ',');
    const Key key{method, std::stod(lambda1), std::stoi(l)};
    acc_by_point[key].push_back(std::stod(acc));
    nmi_by_point[key].push_back(std::stod(nmi));
    acc_by_task[{method, std::stoi(task)}][key].push_back(std::stod(acc));
  }
  auto mean = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };

  // Best grid point per method from the CSV (mean ACC, ties by NMI).
  for (const std::string& method : plan.methods) {
    Key best{};
    double best_acc = -1.0;
    double best_nmi = -1.0;
    for (const auto& [key, accs] : acc_by_point) {
      if (key.method != method) continue;
      const double a = mean(accs);
      const double n = mean(nmi_by_point[key]);
      if (a > best_acc || (a == best_acc && n > best_nmi)) {
        best = key;
        best_acc = a;
        best_nmi = n;
      }
    }
    for (const auto& s : result.summary) {
      if (s.method != method) continue;
      CHECK(s.lambda1 == best.lambda1);
      CHECK(s.l == best.l);
      // Per-task mean at the best point matches the raw rows to 1e-12.
      const auto& samples = acc_by_task[{method, s.task}][best];
      CHECK(std::abs(s.mean_acc - mean(samples)) <= 1e-12);
    }
  }
}

TEST_CASE("default grids follow the reference protocol") {
  const auto lambda1 = BenchPlan::default_lambda1_grid();
  REQUIRE(lambda1.size() == 19);
  for (std::size_t i = 0; i < lambda1.size(); ++i) {
    CHECK(lambda1[i] == doctest::Approx(0.05 * static_cast<double>(i + 1)).epsilon(1e-12));
  }
  CHECK(BenchPlan::default_l_grid() == std::vector<int>{2, 4, 8, 16});
  const auto seeds = BenchPlan::default_seeds();
  REQUIRE(seeds.size() == 20);
  CHECK(seeds.front() == 0);
  CHECK(seeds.back() == 19);
}

TEST_CASE("bench_run output is byte-identical across reruns (wall time aside)") {
  TempDir dir("spmtc_bench_repro");
  BenchPlan plan = tiny_plan(dir.path, 1);
  plan.seeds = {0, 1, 2, 3};
  plan.out_dir = (dir.path / "out1").string();
  bench_run(plan);
  plan.out_dir = (dir.path / "out2").string();
  plan.workers = 3;  // concurrency must not change results
  bench_run(plan);

  const std::string csv1 = strip_wall_column(read_file(dir.path / "out1" / "runs.csv"));
  const std::string csv2 = strip_wall_column(read_file(dir.path / "out2" / "runs.csv"));
  CHECK(csv1 == csv2);
  CHECK(read_file(dir.path / "out1" / "summary.md") ==
        read_file(dir.path / "out2" / "summary.md"));
}

TEST_CASE("bench_run records partial failures and keeps going") {
  TempDir dir("spmtc_bench_partial");
  BenchPlan plan = tiny_plan(dir.path, 1);
  plan.methods = {"lssmtc"};
  plan.lambda1_grid = {0.5};
  plan.l_grid = {2, 9};  // l = 9 > d = 4 fails per run
  plan.seeds = {0, 1, 2};
  const auto result = bench_run(plan);
  CHECK(result.rows.size() == 3);      // l = 2 runs survive
  CHECK(result.failures.size() == 3);  // l = 9 runs recorded
  CHECK(fs::exists(fs::path(plan.out_dir) / "failures.log"));
}

TEST_CASE("bench_run aborts when a method fails everywhere") {
  TempDir dir("spmtc_bench_allfail");
  BenchPlan plan = tiny_plan(dir.path, 1);
  plan.methods = {"km", "spmtc-h"};
  plan.lambda1_grid = {0.5};
  plan.l_grid = {9};  // spmtc-h always fails; km ignores l
  plan.seeds = {0, 1};
  CHECK_THROWS_AS(bench_run(plan), Error);
}

TEST_CASE("bench plan files parse with defaults") {
  TempDir dir("spmtc_bench_plan");
  write_tiny_synth(dir.path, 1);
  write_text(dir.path / "plan.txt",
             "synth = synth.txt\nmethods = km,spmtc-s\nout = results\n");
  const auto plan = read_bench_plan(dir.path / "plan.txt");
  CHECK(plan.methods == std::vector<std::string>{"km", "spmtc-s"});
  CHECK(plan.lambda1_grid.size() == 19);
  CHECK(plan.l_grid == std::vector<int>{2, 4, 8, 16});
  CHECK(plan.seeds.size() == 20);
  // Relative paths resolve against the plan file's directory.
  CHECK(fs::path(plan.synth_path).parent_path() == dir.path);

  write_text(dir.path / "bad.txt", "methods = km\nout = o\n");
  CHECK_THROWS_AS(read_bench_plan(dir.path / "bad.txt"), InvalidConfigError);
  write_text(dir.path / "bad2.txt",
             "synth = synth.txt\nmethods = nonsense\nout = o\n");
  CHECK_THROWS_AS(read_bench_plan(dir.path / "bad2.txt"), InvalidConfigError);
  write_text(dir.path / "bad3.txt",
             "synth = synth.txt\nmethods = km\nl = two\nout = o\n");
  CHECK_THROWS_AS(read_bench_plan(dir.path / "bad3.txt"), FormatError);
}

TEST_CASE("run_method maps method names onto the right solvers") {
  TempDir dir("spmtc_bench_methods");
  const auto spec = read_synth_spec(write_tiny_synth(dir.path, 2));
  const auto problem = synth_multitask(spec).first;

  const auto km = run_method(problem, "km", 0.5, 2, 3);
  CHECK(km.assignments.size() == 2);
  CHECK(km.task_objectives.size() == 2);

  const auto pooled = run_method(problem, "all-km", 0.5, 2, 3);
  CHECK(pooled.assignments.size() == 2);

  const auto lssmtc = run_method(problem, "lssmtc", 0.5, 2, 3);
  CHECK(lssmtc.config.mode == WeightingMode::none);
  CHECK(lssmtc.weight_history.empty());

  const auto soft = run_method(problem, "spmtc-s", 0.5, 2, 3);
  CHECK(soft.config.mode == WeightingMode::soft);
  CHECK(soft.weight_history.size() == 6);

  const auto hard = run_method(problem, "spmtc-h", 0.5, 2, 3);
  CHECK(hard.config.mode == WeightingMode::hard);

  CHECK_THROWS_AS(run_method(problem, "mystery", 0.5, 2, 3), InvalidConfigError);
}
