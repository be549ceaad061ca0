#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spmtc/errors.hpp"

namespace spmtc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A set of related clustering tasks over a common feature space.
// Task k is a d x n_k matrix whose columns are examples.
struct MultiTaskProblem {
  std::vector<Matrix> tasks;
  int d = 0;  // shared feature dimension (rows of every task matrix)
  int c = 0;  // number of clusters, identical across tasks
  // Ground-truth labels per task (evaluation only). Empty when unknown;
  // otherwise labels[k] has length n_k with values in {0,...,c-1}.
  std::vector<std::vector<int>> labels;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  int n(int k) const { return static_cast<int>(tasks[static_cast<std::size_t>(k)].cols()); }
  int total_n() const {
    int s = 0;
    for (const auto& x : tasks) s += static_cast<int>(x.cols());
    return s;
  }

  // Throws unless: every task has d rows, 1 <= c <= min_k n_k, and any
  // labels are per-task vectors of the right length with values in [0, c).
  void validate() const;
};

// Model parameters of the shared-subspace clustering objective.
//   projection     d x l, orthonormal columns
//   shared_centers l x c, cluster centers in the shared subspace
//   task_centers   per task d x c, cluster centers in the input space
//   partitions     per task n_k x c, nonnegative relaxed assignments
struct ModelState {
  Matrix projection;
  Matrix shared_centers;
  std::vector<Matrix> task_centers;
  std::vector<Matrix> partitions;

  int subspace_dim() const { return static_cast<int>(projection.cols()); }

  // Checks orthonormality of the projection (inf-norm 1e-8), partition
  // nonnegativity, and dimensional consistency with the problem.
  void validate(const MultiTaskProblem& problem) const;
};

enum class WeightingMode { hard, soft, none };

// Per-example self-paced weights plus the per-task pace state.
struct WeightState {
  std::vector<Vector> weights;       // v^(k) in [0,1]^{n_k}
  std::vector<double> thresholds;    // per-task selection threshold (> 0)
  std::vector<double> soft_scales;   // soft mode only: threshold/2
  WeightingMode mode = WeightingMode::none;

  static WeightState unit(const MultiTaskProblem& problem);

  // All weights in [0,1]; soft mode: soft_scale == threshold/2 exactly;
  // mode none: all weights exactly 1.
  void validate() const;
};

// Tuning knobs of a single fit. Defaults follow the reference
// experimental setup (inner cap 50, warm start 20, pace 0.5 + 0.1).
struct FitConfig {
  double lambda1 = 0.5;              // within/cross trade-off, in [0,1]
  int subspace_dim = 2;              // l, 1 <= l <= d
  int inner_max_iters = 50;
  double inner_rel_tol = 1e-6;
  int warm_start_iters = 20;
  double pace_start_fraction = 0.5;  // in (0,1]
  double pace_step_fraction = 0.1;   // in (0,1]
  double ridge_eps = 1e-8;
  std::uint64_t seed = 0;
  WeightingMode mode = WeightingMode::soft;

  void validate() const;

  // Also checks problem-dependent constraints (subspace_dim <= d).
  void validate(const MultiTaskProblem& problem) const;
};

// One objective evaluation, recorded after each inner sweep.
// `total` is the weighted reconstruction lambda1*within + (1-lambda1)*cross.
struct TraceRecord {
  int outer_round = 0;
  int inner_iter = 0;
  double within = 0.0;
  double cross = 0.0;
  double total = 0.0;
  double regularizer = 0.0;
  std::vector<double> selected_fraction;  // per task, share of v > 0
};

using ObjectiveTrace = std::vector<TraceRecord>;

const char* to_string(WeightingMode mode);
WeightingMode weighting_mode_from_string(const std::string& s);

}  // namespace spmtc
