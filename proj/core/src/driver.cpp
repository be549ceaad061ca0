#include "spmtc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <utility>

#include "spmtc/rng.hpp"
#include "spmtc/self_paced.hpp"

namespace spmtc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

WeightState make_weights(const std::vector<Vector>& losses,
                         const std::vector<double>& thresholds, WeightingMode mode) {
  WeightState w;
  w.mode = mode;
  w.thresholds = thresholds;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    if (mode == WeightingMode::hard) {
      w.weights.push_back(hard_weights(losses[k], thresholds[k]));
    } else {
      const double gamma = thresholds[k] / 2.0;
      w.soft_scales.push_back(gamma);
      w.weights.push_back(soft_weights(losses[k], thresholds[k], gamma));
    }
  }
  return w;
}

std::vector<double> initial_thresholds(const std::vector<Vector>& losses,
                                       const PaceSchedule& schedule) {
  std::vector<double> thresholds(losses.size());
  for (std::size_t k = 0; k < losses.size(); ++k) {
    thresholds[k] = threshold_for_fraction(losses[k], schedule.current_fraction[k]);
  }
  return thresholds;
}

}  // namespace

ModelState init_model_state(const MultiTaskProblem& problem, int subspace_dim,
                            std::uint64_t seed) {
  problem.validate();
  if (subspace_dim < 1 || subspace_dim > problem.d) {
    throw InvalidConfigError("subspace dimension outside [1, d]");
  }
  ModelState state;
  state.projection = Matrix::Identity(problem.d, subspace_dim);
  state.shared_centers = Matrix::Zero(subspace_dim, problem.c);
  for (int k = 0; k < problem.num_tasks(); ++k) {
    // Partition seeded from the best of a few Lloyd restarts, with a
    // strictly positive floor so every entry stays alive under the
    // multiplicative updates. Dense uniform noise breaks symmetry too
    // weakly and routinely strands the solver in merged-cluster optima.
    const KMeansResult km = [&] {
      KMeansResult best;
      for (std::uint64_t restart = 0; restart < 3; ++restart) {
        const std::uint64_t mix =
            seed ^ (0x9E3779B97F4A7C15ULL *
                    (static_cast<std::uint64_t>(k) * 8 + restart + 1));
        KMeansResult candidate =
            kmeans_fit(problem.tasks[static_cast<std::size_t>(k)], problem.c, mix);
        if (restart == 0 || candidate.inertia < best.inertia) best = std::move(candidate);
      }
      return best;
    }();
    Matrix p = Matrix::Constant(problem.n(k), problem.c, 0.05);
    for (int i = 0; i < problem.n(k); ++i) {
      p(i, km.assignments[static_cast<std::size_t>(i)]) = 1.0;
    }
    state.partitions.push_back(std::move(p));
    state.task_centers.emplace_back(Matrix::Zero(problem.d, problem.c));
  }
  return state;
}

RunResult spmtc_fit(const MultiTaskProblem& problem, const FitConfig& config) {
  const auto start = Clock::now();
  problem.validate();
  config.validate(problem);

  RunResult result;
  result.config = config;
  result.seed = config.seed;
  result.state = init_model_state(problem, config.subspace_dim, config.seed);

  if (config.mode == WeightingMode::none) {
    const WeightState unit = WeightState::unit(problem);
    InnerFitReport report =
        inner_fit(problem, result.state, unit, config, TraceContext{1, 0.0});
    result.state = std::move(report.state);
    result.trace = std::move(report.trace);
    result.weights = unit;
  } else {
    // Warm start: plain unit-weight solver for exactly warm_start_iters
    // sweeps (convergence exit disabled) to get usable loss estimates.
    const WeightState unit = WeightState::unit(problem);
    FitConfig warm = config;
    warm.inner_max_iters = config.warm_start_iters;
    warm.inner_rel_tol = 0.0;
    InnerFitReport warm_report =
        inner_fit(problem, result.state, unit, warm, TraceContext{0, 0.0});
    result.state = std::move(warm_report.state);
    result.trace = std::move(warm_report.trace);

    PaceSchedule schedule = PaceSchedule::start(
        problem.num_tasks(), config.pace_start_fraction, config.pace_step_fraction);
    std::vector<Vector> losses = example_losses(problem, result.state, config.lambda1);
    std::vector<double> thresholds = initial_thresholds(losses, schedule);

    int round = 1;
    while (true) {
      // Step 1: closed-form weights from the current losses.
      WeightState weights = make_weights(losses, thresholds, config.mode);
      result.weight_history.push_back(weights);

      // Step 2: alternating solve with the weights fixed.
      InnerFitReport report =
          inner_fit(problem, result.state, weights, config,
                    TraceContext{round, regularizer_value(weights)});
      result.state = std::move(report.state);
      result.trace.insert(result.trace.end(), report.trace.begin(), report.trace.end());
      result.weights = std::move(weights);

      const bool all_included =
          std::all_of(schedule.current_fraction.begin(), schedule.current_fraction.end(),
                      [](double f) { return f >= 1.0; });
      if (all_included) break;

      losses = example_losses(problem, result.state, config.lambda1);
      auto advanced = advance_pace(schedule, losses);
      schedule = std::move(advanced.first);
      thresholds = std::move(advanced.second);
      ++round;
    }
  }

  for (const Matrix& p : result.state.partitions) {
    result.assignments.push_back(assign_clusters(p));
  }
  result.wall_ms = ms_since(start);
  return result;
}

std::vector<int> assign_clusters(const Matrix& partition) {
  if (partition.rows() == 0 || partition.cols() == 0) {
    throw DimensionError("assign_clusters: empty partition matrix");
  }
  if (partition.minCoeff() < 0.0) {
    throw InvariantViolationError("assign_clusters: negative entries");
  }
  std::vector<int> labels(static_cast<std::size_t>(partition.rows()));
  for (Eigen::Index i = 0; i < partition.rows(); ++i) {
    int best = 0;
    double best_value = partition(i, 0);
    for (Eigen::Index j = 1; j < partition.cols(); ++j) {
      if (partition(i, j) > best_value) {
        best_value = partition(i, j);
        best = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

KMeansResult kmeans_fit(const Matrix& x, int c, std::uint64_t seed, int max_iters) {
  const auto n = static_cast<int>(x.cols());
  if (c < 1) throw InvalidInputError("kmeans_fit: c must be >= 1");
  if (n < c) throw InvalidInputError("kmeans_fit: fewer points than clusters");

  // Seeded random-example initialization (partial Fisher-Yates).
  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < c; ++i) {
    const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(n - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  Matrix centers(x.rows(), c);
  for (int j = 0; j < c; ++j) centers.col(j) = x.col(order[static_cast<std::size_t>(j)]);

  KMeansResult result;
  result.assignments.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> nearest_dist(static_cast<std::size_t>(n), 0.0);

  auto assign_all = [&]() {
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.col(i) - centers.col(0)).squaredNorm();
      for (int j = 1; j < c; ++j) {
        const double dist = (x.col(i) - centers.col(j)).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = j;
        }
      }
      result.assignments[static_cast<std::size_t>(i)] = best;
      nearest_dist[static_cast<std::size_t>(i)] = best_d;
      inertia += best_d;
    }
    return inertia;
  };

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    double inertia = assign_all();

    // Reseed empty clusters to the worst-fit point.
    for (int j = 0; j < c; ++j) {
      const bool empty =
          std::none_of(result.assignments.begin(), result.assignments.end(),
                       [j](int a) { return a == j; });
      if (!empty) continue;
      int farthest = 0;
      for (int i = 1; i < n; ++i) {
        if (nearest_dist[static_cast<std::size_t>(i)] >
            nearest_dist[static_cast<std::size_t>(farthest)]) {
          farthest = i;
        }
      }
      centers.col(j) = x.col(farthest);
      result.assignments[static_cast<std::size_t>(farthest)] = j;
      nearest_dist[static_cast<std::size_t>(farthest)] = 0.0;
      inertia = 0.0;
      for (double dist : nearest_dist) inertia += dist;
    }

    result.inertia_trace.push_back(inertia);
    result.inertia = inertia;
    if (inertia >= prev_inertia) break;  // converged (strict decrease exhausted)
    prev_inertia = inertia;

    // Update step: centers = cluster means.
    Matrix sums = Matrix::Zero(x.rows(), c);
    std::vector<int> counts(static_cast<std::size_t>(c), 0);
    for (int i = 0; i < n; ++i) {
      const int j = result.assignments[static_cast<std::size_t>(i)];
      sums.col(j) += x.col(i);
      ++counts[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < c; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        centers.col(j) = sums.col(j) / counts[static_cast<std::size_t>(j)];
      }
    }
  }
  // Final assignment so centers/assignments/inertia are mutually consistent.
  result.inertia = assign_all();
  result.inertia_trace.push_back(result.inertia);
  result.centers = centers;
  return result;
}

RunResult pooled_baseline(const MultiTaskProblem& problem, BaselineMethod method,
                          std::uint64_t seed) {
  problem.validate();
  if (method != BaselineMethod::kmeans) {
    throw InvalidConfigError("pooled_baseline: unsupported method");
  }
  const auto start = Clock::now();

  Matrix pooled(problem.d, problem.total_n());
  int offset = 0;
  for (const Matrix& x : problem.tasks) {
    pooled.middleCols(offset, static_cast<int>(x.cols())) = x;
    offset += static_cast<int>(x.cols());
  }

  const KMeansResult km = kmeans_fit(pooled, problem.c, seed);

  RunResult result;
  result.seed = seed;
  offset = 0;
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const int nk = problem.n(k);
    result.assignments.emplace_back(km.assignments.begin() + offset,
                                    km.assignments.begin() + offset + nk);
    result.task_objectives.push_back(km.inertia);
    offset += nk;
  }
  result.wall_ms = ms_since(start);
  return result;
}

}  // namespace spmtc
