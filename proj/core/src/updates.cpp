#include "spmtc/updates.hpp"

#include <cmath>
#include <string>

#include "spmtc/linalg.hpp"

namespace spmtc {

namespace {

void check_consistent(const MultiTaskProblem& problem, const ModelState& state,
                      const WeightState& weights) {
  const int m = problem.num_tasks();
  if (static_cast<int>(state.partitions.size()) != m ||
      static_cast<int>(state.task_centers.size()) != m ||
      static_cast<int>(weights.weights.size()) != m) {
    throw DimensionError("state/weights do not cover every task");
  }
  if (state.projection.rows() != problem.d) {
    throw DimensionError("projection rows != feature dimension");
  }
  if (state.shared_centers.rows() != state.projection.cols() ||
      state.shared_centers.cols() != problem.c) {
    throw DimensionError("shared centers must be l x c");
  }
  for (int k = 0; k < m; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (state.partitions[ku].rows() != problem.n(k) ||
        state.partitions[ku].cols() != problem.c) {
      throw DimensionError("partition of task " + std::to_string(k) + " must be n_k x c");
    }
    if (state.task_centers[ku].rows() != problem.d ||
        state.task_centers[ku].cols() != problem.c) {
      throw DimensionError("task centers of task " + std::to_string(k) + " must be d x c");
    }
    if (weights.weights[ku].size() != problem.n(k)) {
      throw DimensionError("weights of task " + std::to_string(k) + " must have length n_k");
    }
  }
}

void check_lambda1(double lambda1) {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
    throw InvalidConfigError("lambda1 outside [0,1]");
  }
}

bool all_zero(const Vector& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

ObjectiveValue objective(const MultiTaskProblem& problem, const ModelState& state,
                         const WeightState& weights, double lambda1) {
  check_lambda1(lambda1);
  check_consistent(problem, state, weights);

  ObjectiveValue value;
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Matrix& x = problem.tasks[ku];
    const Matrix& p = state.partitions[ku];
    const Vector& v = weights.weights[ku];

    const Matrix within_residual = x - state.task_centers[ku] * p.transpose();
    const Matrix cross_residual =
        state.projection.transpose() * x - state.shared_centers * p.transpose();
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double w2 = v[i] * v[i];
      value.within_task += w2 * within_residual.col(i).squaredNorm();
      value.cross_task += w2 * cross_residual.col(i).squaredNorm();
    }
  }
  value.total = lambda1 * value.within_task + (1.0 - lambda1) * value.cross_task;
  return value;
}

std::vector<Vector> example_losses(const MultiTaskProblem& problem, const ModelState& state,
                                   double lambda1) {
  check_lambda1(lambda1);
  check_consistent(problem, state, WeightState::unit(problem));

  std::vector<Vector> losses;
  losses.reserve(problem.tasks.size());
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Matrix& x = problem.tasks[ku];
    const Matrix& p = state.partitions[ku];
    const Matrix within_residual = x - state.task_centers[ku] * p.transpose();
    const Matrix cross_residual =
        state.projection.transpose() * x - state.shared_centers * p.transpose();
    Vector loss(x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      loss[i] = lambda1 * within_residual.col(i).squaredNorm() +
                (1.0 - lambda1) * cross_residual.col(i).squaredNorm();
    }
    losses.push_back(std::move(loss));
  }
  return losses;
}

Matrix update_shared_centers(const MultiTaskProblem& problem, const ModelState& state,
                             const WeightState& weights, double ridge_eps) {
  check_consistent(problem, state, weights);
  bool any_selected = false;
  for (const Vector& v : weights.weights) any_selected = any_selected || !all_zero(v);
  if (!any_selected) {
    throw DegenerateWeightsError("update of shared centers: no example selected in any task");
  }

  const int c = problem.c;
  Matrix gram = Matrix::Zero(c, c);            // sum_k P^T D P
  Matrix moment = Matrix::Zero(problem.d, c);  // sum_k X D P
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Vector w2 = weights.weights[ku].array().square();
    const Matrix weighted_p = w2.asDiagonal() * state.partitions[ku];
    gram.noalias() += state.partitions[ku].transpose() * weighted_p;
    moment.noalias() += problem.tasks[ku] * weighted_p;
  }
  const Matrix projected = state.projection.transpose() * moment;  // l x c
  return solve_regularized(gram, projected, ridge_eps);
}

Matrix update_task_centers(const MultiTaskProblem& problem, const ModelState& state,
                           const WeightState& weights, int k, double ridge_eps) {
  check_consistent(problem, state, weights);
  if (k < 0 || k >= problem.num_tasks()) throw DimensionError("task index out of range");
  const auto ku = static_cast<std::size_t>(k);
  if (all_zero(weights.weights[ku])) {
    throw DegenerateWeightsError("update of task centers: no example selected in task " +
                                 std::to_string(k));
  }

  const Vector w2 = weights.weights[ku].array().square();
  const Matrix weighted_p = w2.asDiagonal() * state.partitions[ku];
  const Matrix gram = state.partitions[ku].transpose() * weighted_p;
  const Matrix moment = problem.tasks[ku] * weighted_p;
  return solve_regularized(gram, moment, ridge_eps);
}

Matrix update_partition(const MultiTaskProblem& problem, const ModelState& state,
                        const WeightState& weights, int k, double lambda1) {
  check_lambda1(lambda1);
  check_consistent(problem, state, weights);
  if (k < 0 || k >= problem.num_tasks()) throw DimensionError("task index out of range");
  const auto ku = static_cast<std::size_t>(k);
  const Matrix& p = state.partitions[ku];
  if (p.size() > 0 && p.minCoeff() < 0.0) {
    throw InvariantViolationError("partition of task " + std::to_string(k) +
                                  " has negative entries");
  }

  const Matrix& x = problem.tasks[ku];
  const Vector& v = weights.weights[ku];

  // A = D T with D = diag(v)^2, T = lambda1 X^T Mk + (1-lambda1) X^T W M.
  // D is diagonal and nonnegative, so row i of the weighted ratio
  // (A+ + D P B-) / (A- + D P B+) carries v_i^2 in both numerator and
  // denominator; it cancels exactly for v_i > 0. Computing the unweighted
  // ratio keeps the 1e-12 guard from swamping rows with tiny soft weights
  // (which would zero-lock them).
  const Matrix target = lambda1 * (x.transpose() * state.task_centers[ku]) +
                        (1.0 - lambda1) * (x.transpose() * state.projection * state.shared_centers);
  const Matrix b = lambda1 * (state.task_centers[ku].transpose() * state.task_centers[ku]) +
                   (1.0 - lambda1) * (state.shared_centers.transpose() * state.shared_centers);

  const Matrix t_pos = (target.cwiseAbs() + target) / 2.0;
  const Matrix t_neg = (target.cwiseAbs() - target) / 2.0;
  const Matrix b_pos = (b.cwiseAbs() + b) / 2.0;
  const Matrix b_neg = (b.cwiseAbs() - b) / 2.0;

  const Matrix numer = t_pos + p * b_neg;
  const Matrix denom = t_neg + p * b_pos;

  Matrix next = p;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (v[i] == 0.0) continue;  // unselected rows keep their values
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      next(i, j) = p(i, j) * std::sqrt(numer(i, j) / (denom(i, j) + 1e-12));
    }
  }
  return next;
}

Matrix update_projection(const MultiTaskProblem& problem, const ModelState& state,
                         const WeightState& weights, double ridge_eps) {
  check_consistent(problem, state, weights);
  const int d = problem.d;
  const int c = problem.c;
  const int l = state.subspace_dim();

  Matrix data_gram = Matrix::Zero(d, d);  // X D X^T
  Matrix moment = Matrix::Zero(d, c);     // X D P
  Matrix gram = Matrix::Zero(c, c);       // P^T D P
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Matrix& x = problem.tasks[ku];
    const Vector w2 = weights.weights[ku].array().square();
    data_gram.noalias() += x * (w2.asDiagonal() * x.transpose());
    const Matrix weighted_p = w2.asDiagonal() * state.partitions[ku];
    moment.noalias() += x * weighted_p;
    gram.noalias() += state.partitions[ku].transpose() * weighted_p;
  }

  // S = X D X^T - (X D P)(P^T D P + eps I)^{-1}(X D P)^T, symmetrized
  // against roundoff before the eigensolve.
  Matrix s = data_gram - solve_regularized(gram, moment, ridge_eps) * moment.transpose();
  s = ((s + s.transpose()) / 2.0).eval();
  return eigh_ascending(s, l).second;
}

std::vector<double> selected_fractions(const WeightState& weights) {
  std::vector<double> fractions;
  fractions.reserve(weights.weights.size());
  for (const Vector& v : weights.weights) {
    if (v.size() == 0) {
      fractions.push_back(0.0);
      continue;
    }
    const double selected = static_cast<double>((v.array() > 0.0).count());
    fractions.push_back(selected / static_cast<double>(v.size()));
  }
  return fractions;
}

InnerFitReport inner_fit(const MultiTaskProblem& problem, const ModelState& initial,
                         const WeightState& weights, const FitConfig& config,
                         const TraceContext& ctx) {
  check_consistent(problem, initial, weights);
  for (int k = 0; k < problem.num_tasks(); ++k) {
    if (all_zero(weights.weights[static_cast<std::size_t>(k)])) {
      throw DegenerateWeightsError("inner fit: no example selected in task " +
                                   std::to_string(k));
    }
  }

  InnerFitReport report;
  report.state = initial;
  const std::vector<double> fractions = selected_fractions(weights);

  auto record = [&](int iter, const ObjectiveValue& value) {
    TraceRecord rec;
    rec.outer_round = ctx.outer_round;
    rec.inner_iter = iter;
    rec.within = value.within_task;
    rec.cross = value.cross_task;
    rec.total = value.total;
    rec.regularizer = ctx.regularizer;
    rec.selected_fraction = fractions;
    report.trace.push_back(std::move(rec));
  };

  ObjectiveValue current = objective(problem, report.state, weights, config.lambda1);
  record(0, current);

  for (int iter = 1; iter <= config.inner_max_iters; ++iter) {
    report.state.shared_centers =
        update_shared_centers(problem, report.state, weights, config.ridge_eps);
    for (int k = 0; k < problem.num_tasks(); ++k) {
      report.state.task_centers[static_cast<std::size_t>(k)] =
          update_task_centers(problem, report.state, weights, k, config.ridge_eps);
    }
    for (int k = 0; k < problem.num_tasks(); ++k) {
      report.state.partitions[static_cast<std::size_t>(k)] =
          update_partition(problem, report.state, weights, k, config.lambda1);
    }
    report.state.projection = update_projection(problem, report.state, weights, config.ridge_eps);
    // Joint projection step: re-sync the shared centers to the new basis
    // so the sweep is non-increasing end to end.
    report.state.shared_centers =
        update_shared_centers(problem, report.state, weights, config.ridge_eps);

    const ObjectiveValue next = objective(problem, report.state, weights, config.lambda1);
    record(iter, next);
    report.iterations_used = iter;

    const double rel_change =
        std::abs(next.total - current.total) / std::max(std::abs(current.total), 1e-12);
    current = next;
    if (rel_change < config.inner_rel_tol) {
      report.converged = true;
      break;
    }
  }
  report.state.validate(problem);  // orthonormal projection, nonnegative partitions
  return report;
}

}  // namespace spmtc
