#pragma once

#include <utility>
#include <vector>

#include "spmtc/types.hpp"

namespace spmtc {

// Per-task schedule of selected-data fractions. Fractions only grow and
// are capped at 1.0.
struct PaceSchedule {
  std::vector<double> current_fraction;
  double start_fraction = 0.5;
  double step_fraction = 0.1;

  static PaceSchedule start(int num_tasks, double start_fraction, double step_fraction);
};

// Selection threshold that admits at least ceil(fraction * n) examples:
// the ceil(fraction*n)-th smallest loss plus 1e-12 (ties inclusive).
// fraction = 1 therefore returns max(losses) + 1e-12.
// Throws EmptyTaskError on an empty loss vector.
double threshold_for_fraction(const Vector& losses, double fraction);

// Binary weights: v_i = 1 iff L_i <= threshold.
Vector hard_weights(const Vector& losses, double threshold);

// Mixture soft weights with scale gamma (default threshold/2):
//   v = 1                                if L <= gamma*threshold/(gamma+threshold)
//   v = 0                                if L >= threshold
//   v = gamma/L - gamma/threshold        otherwise
// Continuous and non-increasing in the loss; with gamma = threshold/2 the
// saturation point is threshold/3.
Vector soft_weights(const Vector& losses, double threshold, double gamma);
Vector soft_weights(const Vector& losses, double threshold);

// Value of the self-paced regularizer f for one task:
//   hard: threshold * sum_i v_i
//   soft: sum_i gamma * ln(v_i + gamma/threshold)
//   none: 0
double regularizer_value(const Vector& weights, double threshold, double gamma,
                         WeightingMode mode);

// Total regularizer over all tasks of a weight state.
double regularizer_value(const WeightState& weights);

// Advances every task's fraction by step_fraction (clamped to 1.0, values
// within 1e-9 of 1.0 snap exactly) and recomputes per-task thresholds from
// the given current losses.
std::pair<PaceSchedule, std::vector<double>> advance_pace(
    const PaceSchedule& schedule, const std::vector<Vector>& losses_per_task);

}  // namespace spmtc
