#include "spmtc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace spmtc {

namespace {

// Remap arbitrary integer labels to dense indices 0..k-1 (sorted order).
std::vector<int> densify(const std::vector<int>& labels, int& num_distinct) {
  std::map<int, int> remap;
  for (int y : labels) remap.emplace(y, 0);
  int next = 0;
  for (auto& [key, idx] : remap) idx = next++;
  num_distinct = next;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
  return out;
}

Matrix contingency(const std::vector<int>& a, const std::vector<int>& b, int ca, int cb) {
  Matrix table = Matrix::Zero(ca, cb);
  for (std::size_t i = 0; i < a.size(); ++i) table(a[i], b[i]) += 1.0;
  return table;
}

void check_pair(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.size() != pred.size()) {
    throw DimensionError("label vectors have different lengths (" +
                         std::to_string(truth.size()) + " vs " + std::to_string(pred.size()) +
                         ")");
  }
  if (truth.empty()) throw DimensionError("label vectors must be nonempty");
}

}  // namespace

namespace detail {

// Hungarian algorithm (shortest augmenting path with potentials) on the
// negated score matrix; O(n^3).
std::vector<int> max_assignment(const Matrix& score) {
  const int n = static_cast<int>(score.rows());
  const double inf = std::numeric_limits<double>::infinity();

  // cost = -score, 1-indexed working arrays.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

// Continued-fraction evaluation of I_x(a,b) (Lentz's method).
namespace {
double betacf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-14;
  constexpr double fpmin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}
}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

double clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  check_pair(truth, pred);
  int c_true = 0;
  int c_pred = 0;
  const std::vector<int> t = densify(truth, c_true);
  const std::vector<int> r = densify(pred, c_pred);

  const int size = std::max(c_true, c_pred);
  Matrix table = Matrix::Zero(size, size);
  table.topLeftCorner(c_pred, c_true) = contingency(r, t, c_pred, c_true);

  const std::vector<int> mapping = detail::max_assignment(table);
  double matched = 0.0;
  for (int i = 0; i < size; ++i) matched += table(i, mapping[static_cast<std::size_t>(i)]);
  return matched / static_cast<double>(truth.size());
}

double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
  check_pair(truth, pred);
  int c_true = 0;
  int c_pred = 0;
  const std::vector<int> t = densify(truth, c_true);
  const std::vector<int> r = densify(pred, c_pred);
  const double n = static_cast<double>(truth.size());

  const Matrix table = contingency(t, r, c_true, c_pred);
  const Vector row = table.rowwise().sum();
  const Vector col = table.colwise().sum();

  double h_true = 0.0;
  for (int i = 0; i < c_true; ++i) {
    if (row[i] > 0.0) h_true -= row[i] / n * std::log(row[i] / n);
  }
  double h_pred = 0.0;
  for (int j = 0; j < c_pred; ++j) {
    if (col[j] > 0.0) h_pred -= col[j] / n * std::log(col[j] / n);
  }
  if (h_true <= 0.0 && h_pred <= 0.0) return 1.0;  // both single-cluster
  if (h_true <= 0.0 || h_pred <= 0.0) return 0.0;

  double mi = 0.0;
  for (int i = 0; i < c_true; ++i) {
    for (int j = 0; j < c_pred; ++j) {
      if (table(i, j) > 0.0) {
        mi += table(i, j) / n * std::log(n * table(i, j) / (row[i] * col[j]));
      }
    }
  }
  const double value = mi / std::sqrt(h_true * h_pred);
  return std::clamp(value, 0.0, 1.0);
}

MetricReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred) {
  MetricReport report;
  report.acc = clustering_accuracy(truth, pred);
  report.nmi = nmi(truth, pred);
  report.n = static_cast<int>(truth.size());
  densify(truth, report.c_true);
  densify(pred, report.c_pred);
  return report;
}

TTestResult welch_t_test(const std::vector<double>& sample_a,
                         const std::vector<double>& sample_b) {
  const auto na = static_cast<double>(sample_a.size());
  const auto nb = static_cast<double>(sample_b.size());
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw InvalidInputError("welch_t_test: each sample needs at least 2 observations");
  }
  auto mean = [](const std::vector<double>& s) {
    double sum = 0.0;
    for (double x : s) sum += x;
    return sum / static_cast<double>(s.size());
  };
  auto variance = [&](const std::vector<double>& s, double mu) {
    double sum = 0.0;
    for (double x : s) sum += (x - mu) * (x - mu);
    return sum / (static_cast<double>(s.size()) - 1.0);
  };
  const double ma = mean(sample_a);
  const double mb = mean(sample_b);
  const double va = variance(sample_a, ma);
  const double vb = variance(sample_b, mb);
  if (va <= 0.0 && vb <= 0.0) {
    throw InvalidInputError("welch_t_test: both samples have zero variance");
  }

  const double sa = va / na;
  const double sb = vb / nb;
  TTestResult result;
  result.t = (ma - mb) / std::sqrt(sa + sb);
  result.dof = (sa + sb) * (sa + sb) /
               (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  const double x = result.dof / (result.dof + result.t * result.t);
  result.p = detail::reg_inc_beta(result.dof / 2.0, 0.5, x);
  return result;
}

}  // namespace spmtc
