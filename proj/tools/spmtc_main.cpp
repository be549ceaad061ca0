// spmtc: multi-task clustering from the command line.
//
// Subcommands:
//   generate  synth spec file -> data directory (task files + manifest)
//   fit       manifest + method -> result files (assignments, trace, header)
//   bench     plan file -> runs.csv + summary.md (+ per-run results)
//   eval      assignments + labels -> ACC / NMI report

#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include "spmtc/bench.hpp"
#include "spmtc/driver.hpp"
#include "spmtc/io.hpp"
#include "spmtc/metrics.hpp"

namespace {

int cmd_generate(const std::string& spec_path, const std::string& out_dir) {
  const spmtc::SynthSpec spec = spmtc::read_synth_spec(spec_path);
  const auto manifest = spmtc::write_synth_problem(spec, out_dir);
  std::cout << "wrote " << manifest.string() << "\n";
  return 0;
}

int cmd_fit(const std::string& manifest_path, std::string method, const std::string& mode,
            double lambda1, int l, std::uint64_t seed, const std::string& out_dir) {
  if (!mode.empty()) {
    if (mode == "hard") method = "spmtc-h";
    else if (mode == "soft") method = "spmtc-s";
    else if (mode == "none") method = "lssmtc";
    else throw spmtc::InvalidConfigError("unknown mode '" + mode + "'");
  }
  const spmtc::MultiTaskProblem problem =
      spmtc::load_problem(spmtc::read_manifest(manifest_path));
  const spmtc::RunResult result = spmtc::run_method(problem, method, lambda1, l, seed);
  if (!out_dir.empty()) spmtc::save_result(result, out_dir);

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "method: " << method << "  seed: " << seed << "\n";
  for (std::size_t k = 0; k < result.assignments.size(); ++k) {
    std::cout << "task " << k;
    if (!problem.labels.empty()) {
      const auto report = spmtc::evaluate(problem.labels[k], result.assignments[k]);
      std::cout << "  acc " << report.acc << "  nmi " << report.nmi;
    }
    if (k < result.task_objectives.size()) {
      std::cout << "  objective " << result.task_objectives[k];
    }
    std::cout << "\n";
  }
  std::cout << "wall_ms " << result.wall_ms << "\n";
  return 0;
}

int cmd_bench(const std::string& plan_path, const std::string& out_override, int workers) {
  spmtc::BenchPlan plan = spmtc::read_bench_plan(plan_path);
  if (!out_override.empty()) plan.out_dir = out_override;
  if (workers > 0) plan.workers = workers;
  const spmtc::BenchResult result = spmtc::bench_run(plan);
  std::cout << result.rows.size() << " result rows -> " << result.runs_csv.string() << "\n";
  std::cout << "summary -> " << result.summary_md.string() << "\n";
  if (!result.failures.empty()) {
    std::cout << result.failures.size() << " failed runs (see failures.log)\n";
  }
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
  const auto pred = spmtc::load_labels(pred_path);
  const auto truth = spmtc::load_labels(truth_path);
  const auto report = spmtc::evaluate(truth, pred);
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "acc " << report.acc << "\n";
  std::cout << "nmi " << report.nmi << "\n";
  std::cout << "n " << report.n << "\n";
  std::cout << "c_true " << report.c_true << "\n";
  std::cout << "c_pred " << report.c_pred << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-paced multi-task clustering toolkit"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic multi-task problem");
  generate->add_option("--spec", spec_path, "Synth spec file (key = value)")->required();
  generate->add_option("--out", gen_out, "Output directory")->required();

  std::string manifest_path;
  std::string method = "spmtc-s";
  std::string mode;
  double lambda1 = 0.5;
  int l = 2;
  std::uint64_t seed = 0;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Fit one method on a problem");
  fit->add_option("--manifest", manifest_path, "Problem manifest file")->required();
  fit->add_option("--method", method, "km | all-km | lssmtc | spmtc-h | spmtc-s");
  fit->add_option("--mode", mode, "hard | soft | none (overrides --method)");
  fit->add_option("--lambda1", lambda1, "Within/cross trade-off in [0,1]");
  fit->add_option("--l", l, "Shared subspace dimension");
  fit->add_option("--seed", seed, "Random seed");
  fit->add_option("--out", fit_out, "Directory for result files");

  std::string plan_path;
  std::string bench_out;
  int workers = 0;
  auto* bench = app.add_subcommand("bench", "Run a benchmark plan");
  bench->add_option("--plan", plan_path, "Plan file (key = value)")->required();
  bench->add_option("--out", bench_out, "Override the plan's output directory");
  bench->add_option("--workers", workers, "Concurrent runs (default: plan value)");

  std::string pred_path;
  std::string truth_path;
  auto* eval = app.add_subcommand("eval", "Score assignments against labels");
  eval->add_option("--pred", pred_path, "Predicted assignments, one integer per line")
      ->required();
  eval->add_option("--truth", truth_path, "True labels, one integer per line")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(spec_path, gen_out);
    if (fit->parsed()) return cmd_fit(manifest_path, method, mode, lambda1, l, seed, fit_out);
    if (bench->parsed()) return cmd_bench(plan_path, bench_out, workers);
    if (eval->parsed()) return cmd_eval(pred_path, truth_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
