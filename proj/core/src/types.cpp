#include "spmtc/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spmtc {

void MultiTaskProblem::validate() const {
  if (tasks.empty()) throw InvalidInputError("problem has no tasks");
  int min_n = tasks.front().cols() > 0 ? static_cast<int>(tasks.front().cols()) : 0;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (tasks[k].rows() != d) {
      throw DimensionError("task " + std::to_string(k) + " has " +
                           std::to_string(tasks[k].rows()) + " rows, expected d=" +
                           std::to_string(d));
    }
    min_n = std::min(min_n, static_cast<int>(tasks[k].cols()));
  }
  if (c < 1 || c > min_n) {
    throw InvalidInputError("cluster count c=" + std::to_string(c) +
                            " outside [1, min_k n_k=" + std::to_string(min_n) + "]");
  }
  if (!labels.empty()) {
    if (labels.size() != tasks.size()) {
      throw DimensionError("labels present for " + std::to_string(labels.size()) +
                           " tasks, expected " + std::to_string(tasks.size()));
    }
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (static_cast<int>(labels[k].size()) != n(static_cast<int>(k))) {
        throw DimensionError("labels of task " + std::to_string(k) + " have length " +
                             std::to_string(labels[k].size()) + ", expected " +
                             std::to_string(n(static_cast<int>(k))));
      }
      for (int y : labels[k]) {
        if (y < 0 || y >= c) {
          throw InvalidInputError("label " + std::to_string(y) + " in task " +
                                  std::to_string(k) + " outside {0,...,c-1}");
        }
      }
    }
  }
}

void ModelState::validate(const MultiTaskProblem& problem) const {
  const int d = problem.d;
  const int c = problem.c;
  const int l = subspace_dim();
  if (projection.rows() != d) throw DimensionError("projection must have d rows");
  if (l < 1 || l > d) throw DimensionError("subspace dimension outside [1, d]");
  const Matrix gram = projection.transpose() * projection;
  const double ortho = (gram - Matrix::Identity(l, l)).cwiseAbs().maxCoeff();
  if (ortho > 1e-8) {
    throw InvariantViolationError("projection not orthonormal (||W^T W - I||_inf = " +
                                  std::to_string(ortho) + ")");
  }
  if (shared_centers.rows() != l || shared_centers.cols() != c) {
    throw DimensionError("shared centers must be l x c");
  }
  if (static_cast<int>(task_centers.size()) != problem.num_tasks() ||
      static_cast<int>(partitions.size()) != problem.num_tasks()) {
    throw DimensionError("per-task state must cover every task");
  }
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (task_centers[ku].rows() != d || task_centers[ku].cols() != c) {
      throw DimensionError("task centers of task " + std::to_string(k) + " must be d x c");
    }
    if (partitions[ku].rows() != problem.n(k) || partitions[ku].cols() != c) {
      throw DimensionError("partition of task " + std::to_string(k) + " must be n_k x c");
    }
    if (partitions[ku].size() > 0 && partitions[ku].minCoeff() < 0.0) {
      throw InvariantViolationError("partition of task " + std::to_string(k) +
                                    " has negative entries");
    }
  }
}

WeightState WeightState::unit(const MultiTaskProblem& problem) {
  WeightState w;
  w.mode = WeightingMode::none;
  w.weights.reserve(problem.tasks.size());
  for (const auto& x : problem.tasks) w.weights.push_back(Vector::Ones(x.cols()));
  return w;
}

void WeightState::validate() const {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Vector& v = weights[k];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
        throw InvariantViolationError("weight outside [0,1] in task " + std::to_string(k));
      }
      if (mode == WeightingMode::none && v[i] != 1.0) {
        throw InvariantViolationError("mode none requires unit weights");
      }
    }
  }
  for (double t : thresholds) {
    if (!(t > 0.0)) throw InvariantViolationError("pace threshold must be > 0");
  }
  if (mode == WeightingMode::soft) {
    if (soft_scales.size() != thresholds.size()) {
      throw InvariantViolationError("soft mode requires one scale per threshold");
    }
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (soft_scales[k] != thresholds[k] / 2.0) {
        throw InvariantViolationError("soft scale must equal threshold/2 exactly");
      }
    }
  }
}

void FitConfig::validate() const {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw InvalidConfigError("lambda1 outside [0,1]");
  if (subspace_dim < 1) throw InvalidConfigError("subspace dimension must be positive");
  if (inner_max_iters < 1) throw InvalidConfigError("inner_max_iters must be positive");
  if (!(inner_rel_tol > 0.0)) throw InvalidConfigError("inner_rel_tol must be positive");
  if (warm_start_iters < 1) throw InvalidConfigError("warm_start_iters must be positive");
  if (!(pace_start_fraction > 0.0 && pace_start_fraction <= 1.0)) {
    throw InvalidConfigError("pace_start_fraction outside (0,1]");
  }
  if (!(pace_step_fraction > 0.0 && pace_step_fraction <= 1.0)) {
    throw InvalidConfigError("pace_step_fraction outside (0,1]");
  }
  if (!(ridge_eps > 0.0)) throw InvalidConfigError("ridge_eps must be positive");
}

void FitConfig::validate(const MultiTaskProblem& problem) const {
  validate();
  if (subspace_dim > problem.d) {
    throw InvalidConfigError("subspace dimension " + std::to_string(subspace_dim) +
                             " exceeds feature dimension " + std::to_string(problem.d));
  }
}

const char* to_string(WeightingMode mode) {
  switch (mode) {
    case WeightingMode::hard: return "hard";
    case WeightingMode::soft: return "soft";
    case WeightingMode::none: return "none";
  }
  return "none";
}

WeightingMode weighting_mode_from_string(const std::string& s) {
  if (s == "hard") return WeightingMode::hard;
  if (s == "soft") return WeightingMode::soft;
  if (s == "none") return WeightingMode::none;
  throw InvalidConfigError("unknown weighting mode '" + s + "'");
}

}  // namespace spmtc
