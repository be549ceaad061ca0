#pragma once

#include <vector>

#include "spmtc/types.hpp"

namespace spmtc {

struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  int n = 0;
  int c_true = 0;
  int c_pred = 0;
};

// Clustering accuracy: the matched fraction under the best one-to-one
// mapping of predicted clusters to true classes, found by an optimal
// assignment (Hungarian) on the contingency matrix. Invariant under
// relabeling of either argument.
double clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& pred);

// Normalized mutual information MI / sqrt(H(truth) * H(pred)), natural
// logs. Defined as 1 when both entropies are zero and 0 when exactly one
// is zero.
double nmi(const std::vector<int>& truth, const std::vector<int>& pred);

MetricReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

// Two-sided Welch two-sample t-test with Satterthwaite degrees of
// freedom; p via the regularized incomplete beta function.
// Requires both samples of size >= 2 and positive variance in at least one.
TTestResult welch_t_test(const std::vector<double>& sample_a,
                         const std::vector<double>& sample_b);

namespace detail {
// Maximum-total assignment on a square score matrix; returns the column
// assigned to each row. Exposed for testing.
std::vector<int> max_assignment(const Matrix& score);
// Regularized incomplete beta I_x(a, b). Exposed for testing.
double reg_inc_beta(double a, double b, double x);
}  // namespace detail

}  // namespace spmtc
