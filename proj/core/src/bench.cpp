#include "spmtc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "spmtc/driver.hpp"
#include "spmtc/metrics.hpp"

namespace spmtc {

namespace {

const std::vector<std::string> kKnownMethods = {"km", "all-km", "lssmtc", "spmtc-h",
                                                "spmtc-s"};

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / (static_cast<double>(xs.size()) - 1.0));
}

// Welch p, degrading gracefully when the test's preconditions fail
// (identical deterministic samples are common across seeds).
double comparison_p(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) return mean_of(a) == mean_of(b) ? 1.0 : 0.0;
  const double sda = sd_of(a);
  const double sdb = sd_of(b);
  if (sda <= 0.0 && sdb <= 0.0) return mean_of(a) == mean_of(b) ? 1.0 : 0.0;
  return welch_t_test(a, b).p;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::vector<double> BenchPlan::default_lambda1_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<int> BenchPlan::default_l_grid() { return {2, 4, 8, 16}; }

std::vector<std::uint64_t> BenchPlan::default_seeds() {
  std::vector<std::uint64_t> seeds(20);
  for (std::uint64_t s = 0; s < 20; ++s) seeds[static_cast<std::size_t>(s)] = s;
  return seeds;
}

void BenchPlan::validate() const {
  if (manifest_path.empty() == synth_path.empty()) {
    throw InvalidConfigError("plan needs exactly one of 'manifest' or 'synth'");
  }
  if (methods.empty()) throw InvalidConfigError("plan needs at least one method");
  for (const std::string& m : methods) {
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end()) {
      throw InvalidConfigError("unknown method '" + m + "'");
    }
  }
  if (seeds.empty()) throw InvalidConfigError("plan needs at least one seed");
  if (lambda1_grid.empty() || l_grid.empty()) {
    throw InvalidConfigError("plan grids must be nonempty");
  }
  for (double v : lambda1_grid) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidConfigError("lambda1 grid value outside [0,1]");
  }
  for (int l : l_grid) {
    if (l < 1) throw InvalidConfigError("l grid value must be positive");
  }
  if (out_dir.empty()) throw InvalidConfigError("plan needs an output directory");
  if (workers < 1) throw InvalidConfigError("workers must be >= 1");
}

BenchPlan read_bench_plan(const std::filesystem::path& path) {
  BenchPlan plan;
  const auto base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  auto numeric = [&path](const std::string& key, const std::string& item, auto parse) {
    try {
      return parse(item);
    } catch (const std::exception&) {
      throw FormatError("cannot parse '" + key + "' value '" + item + "' in '" +
                        path.string() + "'");
    }
  };
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "manifest") {
      plan.manifest_path = resolve(value);
    } else if (key == "synth") {
      plan.synth_path = resolve(value);
    } else if (key == "methods") {
      plan.methods = split_list(value);
    } else if (key == "lambda1") {
      plan.lambda1_grid.clear();
      for (const std::string& item : split_list(value)) {
        plan.lambda1_grid.push_back(
            numeric(key, item, [](const std::string& s) { return std::stod(s); }));
      }
    } else if (key == "l") {
      plan.l_grid.clear();
      for (const std::string& item : split_list(value)) {
        plan.l_grid.push_back(
            numeric(key, item, [](const std::string& s) { return std::stoi(s); }));
      }
    } else if (key == "seeds") {
      plan.seeds.clear();
      for (const std::string& item : split_list(value)) {
        plan.seeds.push_back(numeric(key, item, [](const std::string& s) {
          return static_cast<std::uint64_t>(std::stoull(s));
        }));
      }
    } else if (key == "out") {
      plan.out_dir = resolve(value);
    } else if (key == "workers") {
      plan.workers =
          numeric(key, value, [](const std::string& s) { return std::stoi(s); });
    } else if (key == "save_runs") {
      plan.save_runs = (value == "true" || value == "1");
    } else {
      throw FormatError("unknown plan key '" + key + "' in '" + path.string() + "'");
    }
  }
  if (plan.lambda1_grid.empty()) plan.lambda1_grid = BenchPlan::default_lambda1_grid();
  if (plan.l_grid.empty()) plan.l_grid = BenchPlan::default_l_grid();
  if (plan.seeds.empty()) plan.seeds = BenchPlan::default_seeds();
  plan.validate();
  return plan;
}

RunResult run_method(const MultiTaskProblem& problem, const std::string& method,
                     double lambda1, int l, std::uint64_t seed) {
  if (method == "km") {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.method = method;
    result.seed = seed;
    result.config.seed = seed;
    for (int k = 0; k < problem.num_tasks(); ++k) {
      const KMeansResult km = kmeans_fit(problem.tasks[static_cast<std::size_t>(k)],
                                         problem.c, seed);
      result.assignments.push_back(km.assignments);
      result.task_objectives.push_back(km.inertia);
    }
    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return result;
  }
  if (method == "all-km") {
    RunResult result = pooled_baseline(problem, BaselineMethod::kmeans, seed);
    result.method = method;
    result.config.seed = seed;
    return result;
  }

  FitConfig config;
  config.lambda1 = lambda1;
  config.subspace_dim = l;
  config.seed = seed;
  if (method == "lssmtc") {
    config.mode = WeightingMode::none;
  } else if (method == "spmtc-h") {
    config.mode = WeightingMode::hard;
  } else if (method == "spmtc-s") {
    config.mode = WeightingMode::soft;
  } else {
    throw InvalidConfigError("unknown method '" + method + "'");
  }
  RunResult result = spmtc_fit(problem, config);
  result.method = method;
  const double total = result.trace.empty() ? 0.0 : result.trace.back().total;
  result.task_objectives.assign(static_cast<std::size_t>(problem.num_tasks()), total);
  return result;
}

BenchResult bench_run(const BenchPlan& plan) {
  plan.validate();

  MultiTaskProblem problem;
  if (!plan.manifest_path.empty()) {
    problem = load_problem(read_manifest(plan.manifest_path));
  } else {
    problem = synth_multitask(read_synth_spec(plan.synth_path)).first;
  }
  if (problem.labels.empty()) {
    throw InvalidInputError("bench requires ground-truth labels for every task");
  }

  struct RunSpec {
    std::string method;
    double lambda1 = 0.0;
    int l = 0;
    std::uint64_t seed = 0;
    int grid_index = 0;
  };
  std::vector<RunSpec> specs;
  for (const std::string& method : plan.methods) {
    int grid_index = 0;
    for (double lambda1 : plan.lambda1_grid) {
      for (int l : plan.l_grid) {
        for (std::uint64_t seed : plan.seeds) {
          specs.push_back({method, lambda1, l, seed, grid_index});
        }
        ++grid_index;
      }
    }
  }

  const std::filesystem::path out_dir(plan.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  struct Outcome {
    std::vector<BenchRow> rows;
    std::string failure;  // nonempty on error
  };
  std::vector<Outcome> outcomes(specs.size());

  auto execute = [&](std::size_t i) {
    const RunSpec& spec = specs[i];
    try {
      const RunResult result =
          run_method(problem, spec.method, spec.lambda1, spec.l, spec.seed);
      for (int task = 0; task < problem.num_tasks(); ++task) {
        const auto tu = static_cast<std::size_t>(task);
        BenchRow row;
        row.method = spec.method;
        row.task = task;
        row.lambda1 = spec.lambda1;
        row.l = spec.l;
        row.seed = spec.seed;
        row.acc = clustering_accuracy(problem.labels[tu], result.assignments[tu]);
        row.nmi = nmi(problem.labels[tu], result.assignments[tu]);
        row.objective = tu < result.task_objectives.size() ? result.task_objectives[tu] : 0.0;
        row.wall_ms = result.wall_ms;
        outcomes[i].rows.push_back(std::move(row));
      }
      if (plan.save_runs) {
        std::ostringstream name;
        name << spec.method << "_g" << std::setw(3) << std::setfill('0') << spec.grid_index
             << "_s" << spec.seed;
        save_result(result, out_dir / "runs" / name.str());
      }
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << spec.method << ",lambda1=" << format_double(spec.lambda1) << ",l=" << spec.l
          << ",seed=" << spec.seed << ": " << e.what();
      outcomes[i].failure = msg.str();
    }
  };

  const int workers = std::min<int>(plan.workers, static_cast<int>(specs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) execute(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= specs.size()) break;
          execute(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  BenchResult result;
  for (const Outcome& outcome : outcomes) {
    if (!outcome.failure.empty()) {
      result.failures.push_back(outcome.failure);
    } else {
      result.rows.insert(result.rows.end(), outcome.rows.begin(), outcome.rows.end());
    }
  }

  if (!result.failures.empty()) {
    std::ofstream log(out_dir / "failures.log");
    for (const std::string& line : result.failures) log << line << "\n";
  }

  // Abort if some method produced no successful run at all.
  for (const std::string& method : plan.methods) {
    const bool any = std::any_of(result.rows.begin(), result.rows.end(),
                                 [&](const BenchRow& r) { return r.method == method; });
    if (!any) {
      std::ostringstream msg;
      msg << "method '" << method << "' failed on every run:";
      for (const std::string& line : result.failures) {
        if (line.rfind(method + ",", 0) == 0) msg << "\n  " << line;
      }
      throw Error(msg.str());
    }
  }

  // runs.csv (full precision; wall_ms is the only nondeterministic column).
  result.runs_csv = out_dir / "runs.csv";
  {
    std::ofstream csv(result.runs_csv);
    if (!csv) throw IoError("cannot write '" + result.runs_csv.string() + "'");
    csv << "method,task,lambda1,l,seed,acc,nmi,objective,wall_ms\n";
    for (const BenchRow& row : result.rows) {
      csv << row.method << "," << row.task << "," << format_double(row.lambda1) << ","
          << row.l << "," << row.seed << "," << format_double(row.acc) << ","
          << format_double(row.nmi) << "," << format_double(row.objective) << ","
          << format_double(row.wall_ms) << "\n";
    }
  }

  // Best grid point per method: highest mean ACC over all tasks and seeds,
  // ties by mean NMI, then by grid order.
  struct GridStat {
    double lambda1 = 0.0;
    int l = 0;
    double mean_acc = -1.0;
    double mean_nmi = -1.0;
  };
  std::vector<std::string> methods = plan.methods;
  std::vector<GridStat> best_of(methods.size());
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    GridStat best;
    for (double lambda1 : plan.lambda1_grid) {
      for (int l : plan.l_grid) {
        std::vector<double> accs;
        std::vector<double> nmis;
        for (const BenchRow& row : result.rows) {
          if (row.method == methods[mi] && row.lambda1 == lambda1 && row.l == l) {
            accs.push_back(row.acc);
            nmis.push_back(row.nmi);
          }
        }
        if (accs.empty()) continue;
        const double mean_acc = mean_of(accs);
        const double mean_nmi = mean_of(nmis);
        if (mean_acc > best.mean_acc ||
            (mean_acc == best.mean_acc && mean_nmi > best.mean_nmi)) {
          best = {lambda1, l, mean_acc, mean_nmi};
        }
      }
    }
    best_of[mi] = best;
  }

  // Per-task samples at each method's best grid point.
  const int num_tasks = problem.num_tasks();
  auto samples_at_best = [&](std::size_t mi, int task, bool use_acc) {
    std::vector<double> xs;
    for (const BenchRow& row : result.rows) {
      if (row.method == methods[mi] && row.task == task &&
          row.lambda1 == best_of[mi].lambda1 && row.l == best_of[mi].l) {
        xs.push_back(use_acc ? row.acc : row.nmi);
      }
    }
    return xs;
  };

  for (int task = 0; task < num_tasks; ++task) {
    std::vector<MethodTaskSummary> column(methods.size());
    std::size_t best_acc_mi = 0;
    std::size_t best_nmi_mi = 0;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      MethodTaskSummary s;
      s.method = methods[mi];
      s.task = task;
      s.lambda1 = best_of[mi].lambda1;
      s.l = best_of[mi].l;
      const auto accs = samples_at_best(mi, task, true);
      const auto nmis = samples_at_best(mi, task, false);
      s.mean_acc = mean_of(accs);
      s.sd_acc = sd_of(accs);
      s.mean_nmi = mean_of(nmis);
      s.sd_nmi = sd_of(nmis);
      column[mi] = s;
      if (s.mean_acc > column[best_acc_mi].mean_acc) best_acc_mi = mi;
      if (s.mean_nmi > column[best_nmi_mi].mean_nmi) best_nmi_mi = mi;
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      column[mi].p_acc_vs_best = comparison_p(samples_at_best(mi, task, true),
                                              samples_at_best(best_acc_mi, task, true));
      column[mi].p_nmi_vs_best = comparison_p(samples_at_best(mi, task, false),
                                              samples_at_best(best_nmi_mi, task, false));
      column[mi].best_acc = (mi == best_acc_mi) || column[mi].p_acc_vs_best >= 0.05;
      column[mi].best_nmi = (mi == best_nmi_mi) || column[mi].p_nmi_vs_best >= 0.05;
      result.summary.push_back(column[mi]);
    }
  }

  // summary.md: one table, methods as rows, per-task ACC/NMI columns,
  // best-and-comparable entries in bold.
  result.summary_md = out_dir / "summary.md";
  {
    std::ofstream md(result.summary_md);
    if (!md) throw IoError("cannot write '" + result.summary_md.string() + "'");
    md << "# Benchmark summary\n\n";
    md << "Mean +/- sd over " << plan.seeds.size()
       << " seeds at each method's best grid point (best mean ACC, ties by NMI)."
       << " Bold marks the per-column best and everything statistically comparable"
       << " to it (Welch t-test, alpha = 0.05).\n\n";
    md << "| Method | lambda1 | l |";
    for (int task = 0; task < num_tasks; ++task) {
      md << " Task" << task + 1 << " ACC | Task" << task + 1 << " NMI |";
    }
    md << "\n|---|---|---|";
    for (int task = 0; task < num_tasks; ++task) md << "---|---|";
    md << "\n";
    md << std::fixed << std::setprecision(4);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      md << "| " << methods[mi] << " | " << best_of[mi].lambda1 << " | " << best_of[mi].l
         << " |";
      for (int task = 0; task < num_tasks; ++task) {
        const MethodTaskSummary& s =
            result.summary[static_cast<std::size_t>(task) * methods.size() + mi];
        auto cell = [&md](double mean, double sd, bool bold) {
          if (bold) md << " **" << mean << " +/- " << sd << "** |";
          else md << " " << mean << " +/- " << sd << " |";
        };
        cell(s.mean_acc, s.sd_acc, s.best_acc);
        cell(s.mean_nmi, s.sd_nmi, s.best_nmi);
      }
      md << "\n";
    }
  }

  return result;
}

}  // namespace spmtc
