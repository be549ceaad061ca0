#include "spmtc/self_paced.hpp"

#include <algorithm>
#include <cmath>

namespace spmtc {

namespace {

void check_threshold(double threshold) {
  if (!(threshold > 0.0)) throw InvalidInputError("pace threshold must be > 0");
}

void check_losses(const Vector& losses) {
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    if (!(losses[i] >= 0.0)) throw InvalidInputError("losses must be nonnegative");
  }
}

}  // namespace

PaceSchedule PaceSchedule::start(int num_tasks, double start_fraction, double step_fraction) {
  PaceSchedule s;
  s.start_fraction = start_fraction;
  s.step_fraction = step_fraction;
  s.current_fraction.assign(static_cast<std::size_t>(num_tasks), start_fraction);
  return s;
}

double threshold_for_fraction(const Vector& losses, double fraction) {
  if (losses.size() == 0) throw EmptyTaskError("threshold_for_fraction: empty loss vector");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidInputError("fraction outside (0,1]");
  }
  check_losses(losses);

  const auto n = losses.size();
  // ceil with a guard against floating-point drift in fraction * n.
  auto want = static_cast<Eigen::Index>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  want = std::clamp<Eigen::Index>(want, 1, n);

  std::vector<double> sorted(losses.data(), losses.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + (want - 1), sorted.end());
  return sorted[static_cast<std::size_t>(want - 1)] + 1e-12;
}

Vector hard_weights(const Vector& losses, double threshold) {
  check_threshold(threshold);
  check_losses(losses);
  Vector v(losses.size());
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    v[i] = losses[i] <= threshold ? 1.0 : 0.0;
  }
  return v;
}

Vector soft_weights(const Vector& losses, double threshold, double gamma) {
  check_threshold(threshold);
  if (!(gamma > 0.0)) throw InvalidInputError("soft scale must be > 0");
  check_losses(losses);

  const double saturation = gamma * threshold / (gamma + threshold);
  Vector v(losses.size());
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    const double loss = losses[i];
    if (loss <= saturation) {
      v[i] = 1.0;
    } else if (loss >= threshold) {
      v[i] = 0.0;
    } else {
      v[i] = gamma / loss - gamma / threshold;
    }
  }
  return v;
}

Vector soft_weights(const Vector& losses, double threshold) {
  return soft_weights(losses, threshold, threshold / 2.0);
}

double regularizer_value(const Vector& weights, double threshold, double gamma,
                         WeightingMode mode) {
  switch (mode) {
    case WeightingMode::none:
      return 0.0;
    case WeightingMode::hard:
      check_threshold(threshold);
      return threshold * weights.sum();
    case WeightingMode::soft: {
      check_threshold(threshold);
      if (!(gamma > 0.0)) throw InvalidInputError("soft scale must be > 0");
      double value = 0.0;
      for (Eigen::Index i = 0; i < weights.size(); ++i) {
        value += gamma * std::log(weights[i] + gamma / threshold);
      }
      return value;
    }
  }
  return 0.0;
}

double regularizer_value(const WeightState& weights) {
  if (weights.mode == WeightingMode::none) return 0.0;
  double value = 0.0;
  for (std::size_t k = 0; k < weights.weights.size(); ++k) {
    const double gamma =
        weights.mode == WeightingMode::soft ? weights.soft_scales[k] : 0.5;
    value += regularizer_value(weights.weights[k], weights.thresholds[k], gamma, weights.mode);
  }
  return value;
}

std::pair<PaceSchedule, std::vector<double>> advance_pace(
    const PaceSchedule& schedule, const std::vector<Vector>& losses_per_task) {
  if (losses_per_task.size() != schedule.current_fraction.size()) {
    throw DimensionError("advance_pace: one loss vector per task required");
  }
  PaceSchedule next = schedule;
  std::vector<double> thresholds(losses_per_task.size());
  for (std::size_t k = 0; k < losses_per_task.size(); ++k) {
    double f = next.current_fraction[k] + next.step_fraction;
    if (f >= 1.0 - 1e-9) f = 1.0;
    next.current_fraction[k] = f;
    thresholds[k] = threshold_for_fraction(losses_per_task[k], f);
  }
  return {std::move(next), std::move(thresholds)};
}

}  // namespace spmtc
