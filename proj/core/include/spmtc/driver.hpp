#pragma once

#include <cstdint>
#include <vector>

#include "spmtc/types.hpp"
#include "spmtc/updates.hpp"

namespace spmtc {

// Outcome of one full fit: per-task hard assignments plus everything
// needed to audit the run.
struct RunResult {
  std::vector<std::vector<int>> assignments;
  ModelState state;
  ObjectiveTrace trace;
  WeightState weights;  // final weights
  // Weight snapshots per outer self-paced round (diagnostics; empty for
  // mode none).
  std::vector<WeightState> weight_history;
  FitConfig config;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  // Filled by the bench/CLI layer: method name and a per-task objective
  // summary (k-means inertia for the baselines, final total otherwise).
  std::string method;
  std::vector<double> task_objectives;
};

// Deterministic starting point: projection = first l identity columns,
// centers zero, partitions uniform random in (0,1) from the seed.
ModelState init_model_state(const MultiTaskProblem& problem, int subspace_dim,
                            std::uint64_t seed);

// Self-paced multi-task clustering.
//   mode hard/soft: warm start with unit weights (exactly
//     config.warm_start_iters sweeps), then alternate weight updates and
//     inner fits while the per-task selected fraction grows from
//     pace_start_fraction to 1.0; the final round runs on all data.
//   mode none: a single inner fit with unit weights (the plain
//     shared-subspace solver), no warm start, no pacing.
// Assignments are per-row argmax of the final partitions, ties to the
// lowest cluster index.
RunResult spmtc_fit(const MultiTaskProblem& problem, const FitConfig& config);

// Row argmax with lowest-index tie-break.
// Throws DimensionError on an empty matrix, InvariantViolationError on
// negative entries.
std::vector<int> assign_clusters(const Matrix& partition);

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centers;  // d x c
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // one value per Lloyd iteration
};

// Lloyd's algorithm from a seeded random-example initialization. Empty
// clusters are reseeded to the point farthest from its assigned center.
// Throws InvalidInputError when n < c.
KMeansResult kmeans_fit(const Matrix& x, int c, std::uint64_t seed, int max_iters = 100);

enum class BaselineMethod { kmeans };

// Clusters the concatenation of all task columns once and splits the
// assignments back per task.
RunResult pooled_baseline(const MultiTaskProblem& problem, BaselineMethod method,
                          std::uint64_t seed);

}  // namespace spmtc
