#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spmtc/self_paced.hpp"

using namespace spmtc;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("threshold_for_fraction picks the quantile of distinct losses") {
  const Vector losses = vec({1.0, 2.0, 3.0, 4.0});
  const double threshold = threshold_for_fraction(losses, 0.5);
  CHECK(threshold == doctest::Approx(2.0 + 1e-12).epsilon(1e-15));
  CHECK(oracles::count_at_most(losses, threshold) == 2);
}

TEST_CASE("threshold_for_fraction at fraction 1 selects everything") {
  const Vector losses = vec({0.5, 9.0, 3.0});
  const double threshold = threshold_for_fraction(losses, 1.0);
  CHECK(threshold > 9.0);
  CHECK(oracles::count_at_most(losses, threshold) == 3);
}

TEST_CASE("threshold_for_fraction includes ties") {
  const Vector losses = vec({1.0, 1.0, 1.0, 4.0});
  const double threshold = threshold_for_fraction(losses, 0.5);
  CHECK(oracles::count_at_most(losses, threshold) == 3);
}

TEST_CASE("threshold_for_fraction validates inputs") {
  CHECK_THROWS_AS(threshold_for_fraction(Vector(), 0.5), EmptyTaskError);
  const Vector losses = vec({1.0, 2.0});
  CHECK_THROWS_AS(threshold_for_fraction(losses, 0.0), InvalidInputError);
  CHECK_THROWS_AS(threshold_for_fraction(losses, 1.5), InvalidInputError);
  CHECK_THROWS_AS(threshold_for_fraction(vec({-1.0, 2.0}), 0.5), InvalidInputError);
}

TEST_CASE("threshold_for_fraction guarantees the selected count on random losses") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(40));
    Vector losses(n);
    for (Eigen::Index i = 0; i < n; ++i) losses[i] = rng.uniform01() * 10.0;
    const double fraction = 0.05 + 0.95 * rng.uniform01();
    const double threshold = threshold_for_fraction(losses, fraction);
    const int want = static_cast<int>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    CHECK(oracles::count_at_most(losses, threshold) >= want);
  }
}

TEST_CASE("hard_weights thresholds directly") {
  CHECK(hard_weights(vec({0.2, 0.9}), 0.5) == vec({1.0, 0.0}));
  CHECK(hard_weights(vec({0.0, 0.0, 0.0}), 1.0) == vec({1.0, 1.0, 1.0}));
  // Inclusive at the boundary.
  CHECK(hard_weights(vec({0.5}), 0.5)[0] == 1.0);
}

TEST_CASE("hard_weights matches the two-point enumeration oracle") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double loss = rng.uniform01() * 4.0;
    const double threshold = 0.01 + rng.uniform01() * 3.0;
    const Vector v = hard_weights(vec({loss}), threshold);
    CHECK(v[0] == oracles::hard_weight_enum(loss, threshold));
  }
}

TEST_CASE("soft_weights piecewise regions with the default scale") {
  // threshold 1, scale 1/2: saturated below 1/3, zero above 1, else
  // 0.5/L - 0.5.
  CHECK(soft_weights(vec({0.2}), 1.0)[0] == 1.0);
  CHECK(soft_weights(vec({1.2}), 1.0)[0] == 0.0);
  CHECK(soft_weights(vec({0.5}), 1.0)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("soft_weights matches the grid-minimization oracle") {
  Rng rng(15);
  for (int trial = 0; trial < 60; ++trial) {
    const double threshold = 0.05 + rng.uniform01() * 3.0;
    const double gamma = threshold / 2.0;
    const double loss = rng.uniform01() * (threshold * 1.4);
    const double v = soft_weights(vec({loss}), threshold, gamma)[0];
    const double oracle = oracles::soft_weight_grid(loss, threshold, gamma);
    CHECK(std::abs(v - oracle) <= 1e-3);
  }
}

TEST_CASE("soft_weights boundary identities are exact") {
  for (const double threshold : {0.37, 1.0, 8.5}) {
    const Vector at = vec({threshold / 3.0, threshold, threshold / 2.0});
    const Vector v = soft_weights(at, threshold);
    CHECK(std::abs(v[0] - 1.0) <= 1e-12);
    CHECK(v[1] == 0.0);
    CHECK(std::abs(v[2] - 0.5) <= 1e-12);
  }
}

TEST_CASE("soft_weights is continuous with the documented Lipschitz bound") {
  const double threshold = 2.0;
  const double gamma = 1.0;
  const double inner = threshold / 3.0;
  const double lipschitz = gamma / (inner * inner);
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = inner + rng.uniform01() * (threshold - inner);
    const double b = inner + rng.uniform01() * (threshold - inner);
    const double va = soft_weights(vec({a}), threshold, gamma)[0];
    const double vb = soft_weights(vec({b}), threshold, gamma)[0];
    CHECK(std::abs(va - vb) <= lipschitz * std::abs(a - b) + 1e-12);
  }
}

TEST_CASE("both weighting rules are non-increasing in the loss") {
  Rng rng(23);
  const double threshold = 1.3;
  for (int trial = 0; trial < 100; ++trial) {
    double a = rng.uniform01() * 2.0;
    double b = rng.uniform01() * 2.0;
    if (a > b) std::swap(a, b);
    CHECK(hard_weights(vec({a}), threshold)[0] >= hard_weights(vec({b}), threshold)[0]);
    CHECK(soft_weights(vec({a}), threshold)[0] >= soft_weights(vec({b}), threshold)[0]);
  }
}

TEST_CASE("hard weighting is the sharp limit of soft weighting at the extremes") {
  Rng rng(27);
  const double threshold = 1.7;
  for (int trial = 0; trial < 100; ++trial) {
    const double loss = rng.uniform01() * 3.0;
    const double soft = soft_weights(vec({loss}), threshold)[0];
    const double hard = hard_weights(vec({loss}), threshold)[0];
    if (loss <= threshold / 3.0) {
      CHECK(soft == 1.0);
      CHECK(hard == 1.0);
    } else if (loss >= threshold) {
      CHECK(soft == 0.0);
      if (loss > threshold) CHECK(hard == 0.0);
    }
  }
}

TEST_CASE("regularizer_value hard mode sums selected weights") {
  CHECK(regularizer_value(vec({1.0, 0.0, 1.0}), 2.0, 1.0, WeightingMode::hard) ==
        doctest::Approx(4.0));
}

TEST_CASE("regularizer_value soft mode on a constant vector") {
  // all v = 0, gamma/threshold = 1/2 -> n * gamma * ln(1/2)
  const int n = 5;
  const double threshold = 2.0;
  const double gamma = 1.0;
  const double value =
      regularizer_value(Vector::Zero(n), threshold, gamma, WeightingMode::soft);
  CHECK(value == doctest::Approx(n * gamma * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("regularizer_value matches an elementwise summation oracle") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(30));
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform01();
    const double threshold = 0.1 + rng.uniform01();
    const double gamma = threshold / 2.0;

    double hard_sum = 0.0;
    double soft_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      hard_sum += threshold * v[i];
      soft_sum += gamma * std::log(v[i] + gamma / threshold);
    }
    CHECK(std::abs(regularizer_value(v, threshold, gamma, WeightingMode::hard) - hard_sum) <
          1e-12);
    CHECK(std::abs(regularizer_value(v, threshold, gamma, WeightingMode::soft) - soft_sum) <
          1e-12);
    CHECK(regularizer_value(v, threshold, gamma, WeightingMode::none) == 0.0);
  }
}

TEST_CASE("advance_pace steps fractions and recomputes thresholds") {
  PaceSchedule schedule = PaceSchedule::start(2, 0.5, 0.1);
  const std::vector<Vector> losses = {vec({1.0, 2.0, 3.0, 4.0}), vec({5.0, 6.0})};

  auto [next, thresholds] = advance_pace(schedule, losses);
  CHECK(next.current_fraction[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(next.current_fraction[1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(thresholds.size() == 2);

  PaceSchedule high = PaceSchedule::start(1, 0.95, 0.1);
  auto [clamped, t2] = advance_pace(high, {vec({1.0, 2.0})});
  CHECK(clamped.current_fraction[0] == 1.0);
  CHECK(t2[0] > 2.0);  // everything selected
}

TEST_CASE("advance_pace never decreases fractions and reaches exactly 1.0") {
  PaceSchedule schedule = PaceSchedule::start(1, 0.5, 0.1);
  const std::vector<Vector> losses = {vec({1.0, 2.0, 3.0, 4.0, 5.0})};
  double prev = 0.5;
  for (int round = 0; round < 7; ++round) {
    auto [next, thresholds] = advance_pace(schedule, losses);
    CHECK(next.current_fraction[0] >= prev);
    prev = next.current_fraction[0];
    schedule = next;
  }
  CHECK(schedule.current_fraction[0] == 1.0);
}

TEST_CASE("advance_pace grows each task's selected count by its own step") {
  // Distinct losses on different scales so counts are exact per task.
  const int n0 = 20;
  const int n1 = 30;
  Vector l0(n0);
  Vector l1(n1);
  for (int i = 0; i < n0; ++i) l0[i] = 1.0 + i;
  for (int i = 0; i < n1; ++i) l1[i] = 1000.0 + 7.0 * i;

  PaceSchedule schedule = PaceSchedule::start(2, 0.5, 0.1);
  const std::vector<double> thresholds = {threshold_for_fraction(l0, 0.5),
                                          threshold_for_fraction(l1, 0.5)};
  const int count0 = oracles::count_at_most(l0, thresholds[0]);
  const int count1 = oracles::count_at_most(l1, thresholds[1]);
  CHECK(count0 == 10);
  CHECK(count1 == 15);

  auto [next, advanced] = advance_pace(schedule, {l0, l1});
  CHECK(oracles::count_at_most(l0, advanced[0]) - count0 == 2);  // ceil(0.1 * 20)
  CHECK(oracles::count_at_most(l1, advanced[1]) - count1 == 3);  // ceil(0.1 * 30)
}

TEST_CASE("per-task selection fraction meets the schedule") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(40));
    Vector losses(n);
    for (Eigen::Index i = 0; i < n; ++i) losses[i] = rng.uniform01() * 6.0;
    const double fraction = 0.05 + 0.95 * rng.uniform01();
    const double threshold = threshold_for_fraction(losses, fraction);

    const Vector hard = hard_weights(losses, threshold);
    const Vector soft = soft_weights(losses, threshold);
    const auto want =
        static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    CHECK((hard.array() > 0.0).count() >= want);
    CHECK((soft.array() > 0.0).count() >= want);
  }
}
