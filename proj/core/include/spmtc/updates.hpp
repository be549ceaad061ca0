#pragma once

#include <vector>

#include "spmtc/types.hpp"

namespace spmtc {

// Reconstruction objective, split into its two terms:
//   within = sum_k || (X^(k) - Mk P^(k)T) diag(v^(k)) ||_F^2
//   cross  = sum_k || (W^T X^(k) - M P^(k)T) diag(v^(k)) ||_F^2
//   total  = lambda1 * within + (1 - lambda1) * cross
struct ObjectiveValue {
  double within_task = 0.0;
  double cross_task = 0.0;
  double total = 0.0;
};

ObjectiveValue objective(const MultiTaskProblem& problem, const ModelState& state,
                         const WeightState& weights, double lambda1);

// Unweighted per-example reconstruction error
//   L_i = lambda1 ||x_i - [Mk P^T]_.i||^2 + (1-lambda1) ||[W^T X - M P^T]_.i||^2
// one vector per task.
std::vector<Vector> example_losses(const MultiTaskProblem& problem, const ModelState& state,
                                   double lambda1);

// Closed-form update of the shared centers: with D^(k) = diag(v^(k))^2,
//   M = W^T (sum_k X^(k) D^(k) P^(k)) (sum_k P^(k)T D^(k) P^(k) + eps I)^{-1}.
// Throws DegenerateWeightsError when every task is entirely zero-weighted.
Matrix update_shared_centers(const MultiTaskProblem& problem, const ModelState& state,
                             const WeightState& weights, double ridge_eps);

// Closed-form update of task k's centers:
//   Mk = X^(k) D^(k) P^(k) (P^(k)T D^(k) P^(k) + eps I)^{-1}.
// Throws DegenerateWeightsError when task k is entirely zero-weighted.
Matrix update_task_centers(const MultiTaskProblem& problem, const ModelState& state,
                           const WeightState& weights, int k, double ridge_eps);

// Multiplicative update of task k's partition. With
//   A = D [ lambda1 X^T Mk + (1-lambda1) X^T W M ],  B = lambda1 Mk^T Mk + (1-lambda1) M^T M,
//   P <- P .* sqrt( (A+ + D P B-) ./ (A- + D P B+ + 1e-12) ).
// Rows with zero weight are left unchanged (they do not enter the
// objective and must stay revivable for later pace rounds). Zero entries
// stay zero; nonnegativity is preserved; the objective does not increase.
// Throws InvariantViolationError if the current partition has negative entries.
Matrix update_partition(const MultiTaskProblem& problem, const ModelState& state,
                        const WeightState& weights, int k, double lambda1);

// Orthonormal projection update: bottom-l eigenvectors of
//   S = X D X^T - (X D P) (P^T D P + eps I)^{-1} (X D P)^T
// built from the task-concatenated X, P and D = diag(v)^2.
Matrix update_projection(const MultiTaskProblem& problem, const ModelState& state,
                         const WeightState& weights, double ridge_eps);

// Result of one inner (fixed-weights) alternating solve.
struct InnerFitReport {
  ModelState state;
  ObjectiveTrace trace;
  int iterations_used = 0;
  bool converged = false;
};

// Metadata stamped into the trace records of one inner solve; the inner
// solver itself treats the regularizer as a constant.
struct TraceContext {
  int outer_round = 0;
  double regularizer = 0.0;
};

// Alternating minimization for fixed weights: sweeps of
// shared centers -> task centers -> partitions -> projection (the
// projection step re-syncs the shared centers so every step is
// non-increasing). Stops when the relative change of the total objective
// drops below config.inner_rel_tol or after config.inner_max_iters sweeps.
// With unit weights this is exactly the shared-subspace multi-task
// clustering solver the self-paced loop wraps.
//
// Throws DegenerateWeightsError if any task has no positively-weighted
// example.
InnerFitReport inner_fit(const MultiTaskProblem& problem, const ModelState& initial,
                         const WeightState& weights, const FitConfig& config,
                         const TraceContext& ctx = {});

// Share of examples with positive weight, one value per task.
std::vector<double> selected_fractions(const WeightState& weights);

}  // namespace spmtc
