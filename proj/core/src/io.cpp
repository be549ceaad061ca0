#include "spmtc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "spmtc/rng.hpp"

namespace spmtc {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

TaskFileFormat format_from_string(const std::string& s, const std::filesystem::path& where) {
  if (s == "dense") return TaskFileFormat::dense;
  if (s == "sparse-triplet") return TaskFileFormat::sparse_triplet;
  throw FormatError("unknown task format '" + s + "' in " + where.string());
}

int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("cannot parse integer for '" + key + "': '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("cannot parse number for '" + key + "': '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw FormatError("cannot parse seed for '" + key + "': '" + s + "'");
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (m < 1) throw InvalidConfigError("synth: m must be >= 1");
  if (d < 1 || c < 1 || n < 1) throw InvalidConfigError("synth: d, c, n must be positive");
  if (l_true < 1 || l_true > d) throw InvalidConfigError("synth: l_true outside [1, d]");
  if (n < c) throw InvalidConfigError("synth: n must be >= c");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5)) {
    throw InvalidConfigError("synth: outlier_fraction outside [0, 0.5)");
  }
  if (!(noise_sd >= 0.0)) throw InvalidConfigError("synth: noise_sd must be >= 0");
  if (!(separation >= 0.0)) throw InvalidConfigError("synth: separation must be >= 0");
}

Matrix load_dense_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw FormatError("bad dense header in '" + path.string() + "'");
  }
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> x(i, j))) {
        throw FormatError("truncated dense matrix in '" + path.string() + "'");
      }
    }
  }
  return x;
}

Matrix load_sparse_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  long long nnz = 0;
  if (!(in >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) {
    throw FormatError("bad sparse header in '" + path.string() + "'");
  }
  Matrix x = Matrix::Zero(rows, cols);
  for (long long e = 0; e < nnz; ++e) {
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    double value = 0.0;
    if (!(in >> r >> c >> value)) {
      throw FormatError("truncated sparse matrix in '" + path.string() + "'");
    }
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw FormatError("sparse entry out of bounds in '" + path.string() + "'");
    }
    x(r, c) = value;
  }
  return x;
}

void save_dense_matrix(const Matrix& x, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << x.rows() << " " << x.cols() << "\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out << (j ? " " : "") << x(i, j);
    }
    out << "\n";
  }
}

void save_sparse_matrix(const Matrix& x, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  const auto nnz = static_cast<long long>((x.array() != 0.0).count());
  out << x.rows() << " " << x.cols() << " " << nnz << "\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(i, j) != 0.0) out << i << " " << j << " " << x(i, j) << "\n";
    }
  }
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  int y = 0;
  while (in >> y) labels.push_back(y);
  if (!in.eof()) throw FormatError("non-integer label in '" + path.string() + "'");
  return labels;
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (int y : labels) out << y << "\n";
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  KeyValues entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("expected 'key = value' in '" + path.string() + "': " + line);
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream stream(value);
  while (std::getline(stream, current, ',')) {
    const std::string item = trim(current);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

ProblemManifest read_manifest(const std::filesystem::path& path) {
  ProblemManifest manifest;
  manifest.base_dir = path.parent_path();
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "d") {
      manifest.d = parse_int(value, key);
    } else if (key == "c") {
      manifest.c = parse_int(value, key);
    } else if (key == "normalize") {
      manifest.normalize = (value == "true" || value == "1");
    } else if (key == "task") {
      const auto parts = split_list(value);
      if (parts.empty() || parts.size() > 3) {
        throw FormatError("task entry needs 'format,data[,labels]' in '" + path.string() +
                          "'");
      }
      TaskEntry entry;
      entry.format = format_from_string(parts[0], path);
      if (parts.size() < 2) {
        throw FormatError("task entry missing data path in '" + path.string() + "'");
      }
      entry.data_path = parts[1];
      if (parts.size() == 3) entry.label_path = parts[2];
      manifest.tasks.push_back(std::move(entry));
    } else {
      throw FormatError("unknown manifest key '" + key + "' in '" + path.string() + "'");
    }
  }
  if (manifest.tasks.empty()) {
    throw FormatError("manifest '" + path.string() + "' declares no tasks");
  }
  return manifest;
}

void write_manifest(const ProblemManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "d = " << manifest.d << "\n";
  out << "c = " << manifest.c << "\n";
  out << "normalize = " << (manifest.normalize ? "true" : "false") << "\n";
  for (const TaskEntry& entry : manifest.tasks) {
    out << "task = "
        << (entry.format == TaskFileFormat::dense ? "dense" : "sparse-triplet") << ","
        << entry.data_path;
    if (!entry.label_path.empty()) out << "," << entry.label_path;
    out << "\n";
  }
}

SynthSpec read_synth_spec(const std::filesystem::path& path) {
  SynthSpec spec;
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "m") spec.m = parse_int(value, key);
    else if (key == "d") spec.d = parse_int(value, key);
    else if (key == "c") spec.c = parse_int(value, key);
    else if (key == "l_true") spec.l_true = parse_int(value, key);
    else if (key == "n") spec.n = parse_int(value, key);
    else if (key == "separation") spec.separation = parse_double(value, key);
    else if (key == "task_offset") spec.task_offset = parse_double(value, key);
    else if (key == "noise_sd") spec.noise_sd = parse_double(value, key);
    else if (key == "outlier_fraction") spec.outlier_fraction = parse_double(value, key);
    else if (key == "seed") spec.seed = parse_u64(value, key);
    else throw FormatError("unknown synth key '" + key + "' in '" + path.string() + "'");
  }
  spec.validate();
  return spec;
}

MultiTaskProblem load_problem(const ProblemManifest& manifest) {
  if (manifest.tasks.empty()) throw InvalidInputError("manifest declares no tasks");
  MultiTaskProblem problem;
  problem.d = manifest.d;
  problem.c = manifest.c;

  bool any_labels = false;
  std::vector<std::vector<int>> raw_labels;
  for (const TaskEntry& entry : manifest.tasks) {
    const auto data_path = manifest.base_dir / entry.data_path;
    Matrix x = entry.format == TaskFileFormat::dense ? load_dense_matrix(data_path)
                                                     : load_sparse_matrix(data_path);
    if (x.rows() != manifest.d) {
      throw FormatError("'" + data_path.string() + "' has " + std::to_string(x.rows()) +
                        " rows, manifest declares d=" + std::to_string(manifest.d));
    }
    if (manifest.normalize) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm > 0.0) x.col(j) /= norm;
      }
    }
    std::vector<int> labels;
    if (!entry.label_path.empty()) {
      const auto label_path = manifest.base_dir / entry.label_path;
      labels = load_labels(label_path);
      if (static_cast<Eigen::Index>(labels.size()) != x.cols()) {
        throw FormatError("'" + label_path.string() + "' has " +
                          std::to_string(labels.size()) + " labels for " +
                          std::to_string(x.cols()) + " examples");
      }
      any_labels = true;
    }
    raw_labels.push_back(std::move(labels));
    problem.tasks.push_back(std::move(x));
  }

  if (any_labels) {
    for (std::size_t k = 0; k < raw_labels.size(); ++k) {
      if (raw_labels[k].empty() && manifest.tasks[k].label_path.empty() &&
          problem.tasks[k].cols() > 0) {
        throw FormatError("labels missing for task " + std::to_string(k) +
                          " while other tasks are labeled");
      }
    }
    // Densify to {0,...,c-1} over the union of observed values.
    std::set<int> values;
    for (const auto& labels : raw_labels) values.insert(labels.begin(), labels.end());
    if (static_cast<int>(values.size()) > manifest.c) {
      throw FormatError("labels contain " + std::to_string(values.size()) +
                        " distinct values, manifest declares c=" +
                        std::to_string(manifest.c));
    }
    std::map<int, int> remap;
    int next = 0;
    for (int v : values) remap[v] = next++;
    for (auto& labels : raw_labels) {
      for (int& y : labels) y = remap[y];
    }
    problem.labels = std::move(raw_labels);
  }

  problem.validate();
  return problem;
}

void save_result(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  for (std::size_t k = 0; k < result.assignments.size(); ++k) {
    save_labels(result.assignments[k],
                dir / ("assignments_task" + std::to_string(k) + ".txt"));
  }

  {
    std::ofstream out = open_output(dir / "trace.csv");
    std::size_t num_tasks = result.assignments.size();
    for (const TraceRecord& rec : result.trace) {
      num_tasks = std::max(num_tasks, rec.selected_fraction.size());
    }
    out << "outer_round,inner_iter,within,cross,total,reg";
    for (std::size_t k = 0; k < num_tasks; ++k) out << ",frac_" << k;
    out << "\n";
    for (const TraceRecord& rec : result.trace) {
      out << rec.outer_round << "," << rec.inner_iter << "," << rec.within << ","
          << rec.cross << "," << rec.total << "," << rec.regularizer;
      for (std::size_t k = 0; k < num_tasks; ++k) {
        out << "," << (k < rec.selected_fraction.size() ? rec.selected_fraction[k] : 1.0);
      }
      out << "\n";
    }
  }

  {
    std::ofstream out = open_output(dir / "run.txt");
    if (!result.method.empty()) out << "method: " << result.method << "\n";
    out << "seed: " << result.seed << "\n";
    out << "mode: " << to_string(result.config.mode) << "\n";
    out << "lambda1: " << result.config.lambda1 << "\n";
    out << "l: " << result.config.subspace_dim << "\n";
    out << "inner_max_iters: " << result.config.inner_max_iters << "\n";
    out << "inner_rel_tol: " << result.config.inner_rel_tol << "\n";
    out << "warm_start_iters: " << result.config.warm_start_iters << "\n";
    out << "pace_start_fraction: " << result.config.pace_start_fraction << "\n";
    out << "pace_step_fraction: " << result.config.pace_step_fraction << "\n";
    out << "ridge_eps: " << result.config.ridge_eps << "\n";
    out << "tasks: " << result.assignments.size() << "\n";
    out << "wall_ms: " << result.wall_ms << "\n";
  }
}

std::pair<MultiTaskProblem, SynthTruth> synth_multitask(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Orthonormal basis of the shared subspace (QR of a Gaussian draw,
  // column signs fixed by the R diagonal).
  Matrix gaussian(spec.d, spec.l_true);
  for (Eigen::Index j = 0; j < gaussian.cols(); ++j) {
    for (Eigen::Index i = 0; i < gaussian.rows(); ++i) gaussian(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix basis = qr.householderQ() * Matrix::Identity(spec.d, spec.l_true);
  const Matrix r = qr.matrixQR().topRows(spec.l_true).triangularView<Eigen::Upper>();
  for (int j = 0; j < spec.l_true; ++j) {
    if (r(j, j) < 0.0) basis.col(j) = -basis.col(j);
  }

  // Cluster centers in subspace coordinates with pairwise spacing
  // `separation`: a regular polygon in the first two coordinates, or
  // colinear spacing when l_true == 1.
  Matrix centers_sub = Matrix::Zero(spec.l_true, spec.c);
  if (spec.c > 1) {
    if (spec.l_true == 1) {
      for (int j = 0; j < spec.c; ++j) {
        centers_sub(0, j) = spec.separation * (j - 0.5 * (spec.c - 1));
      }
    } else {
      const double pi = 3.14159265358979323846;
      const double radius =
          spec.c == 2 ? spec.separation / 2.0 : spec.separation / (2.0 * std::sin(pi / spec.c));
      for (int j = 0; j < spec.c; ++j) {
        const double angle = 2.0 * pi * j / spec.c;
        centers_sub(0, j) = radius * std::cos(angle);
        centers_sub(1, j) = radius * std::sin(angle);
      }
    }
  }

  MultiTaskProblem problem;
  problem.d = spec.d;
  problem.c = spec.c;
  SynthTruth truth;
  truth.basis = basis;

  for (int k = 0; k < spec.m; ++k) {
    Vector offset = Vector::Zero(spec.l_true);
    for (Eigen::Index i = 0; i < offset.size(); ++i) {
      offset[i] = spec.task_offset * rng.normal();
    }
    Matrix task_centers_sub = centers_sub;
    task_centers_sub.colwise() += offset;
    truth.centers.push_back(basis * task_centers_sub);

    // n/c points per cluster; the remainder goes to the lowest-index
    // clusters.
    std::vector<int> counts(static_cast<std::size_t>(spec.c), spec.n / spec.c);
    for (int j = 0; j < spec.n % spec.c; ++j) ++counts[static_cast<std::size_t>(j)];

    Matrix x(spec.d, spec.n);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(spec.n));
    int col = 0;
    for (int j = 0; j < spec.c; ++j) {
      const Vector center = truth.centers.back().col(j);
      for (int t = 0; t < counts[static_cast<std::size_t>(j)]; ++t) {
        for (int row = 0; row < spec.d; ++row) {
          x(row, col) = center[row] + spec.noise_sd * rng.normal();
        }
        labels.push_back(j);
        ++col;
      }
    }

    // Outliers: uniform draws over the clean data's bounding box inflated
    // by three times its range on each side; labels keep the replaced
    // cluster. The large inflation gives outliers real leverage over
    // squared-error fits, which is what a contamination benchmark needs
    // to register.
    const int num_outliers = static_cast<int>(spec.outlier_fraction * spec.n);
    std::vector<int> outliers;
    if (num_outliers > 0) {
      Vector lo = x.rowwise().minCoeff();
      Vector hi = x.rowwise().maxCoeff();
      const Vector range = hi - lo;
      lo -= 3.0 * range;
      hi += 3.0 * range;

      std::vector<int> order(static_cast<std::size_t>(spec.n));
      for (int i = 0; i < spec.n; ++i) order[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < num_outliers; ++i) {
        const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(spec.n - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
      for (int i = 0; i < num_outliers; ++i) {
        const int idx = order[static_cast<std::size_t>(i)];
        for (int row = 0; row < spec.d; ++row) {
          x(row, idx) = lo[row] + rng.uniform01() * (hi[row] - lo[row]);
        }
        outliers.push_back(idx);
      }
      std::sort(outliers.begin(), outliers.end());
    }

    problem.tasks.push_back(std::move(x));
    problem.labels.push_back(std::move(labels));
    truth.outlier_indices.push_back(std::move(outliers));
  }

  problem.validate();
  return {std::move(problem), std::move(truth)};
}

std::filesystem::path write_synth_problem(const SynthSpec& spec,
                                          const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  const auto [problem, truth] = synth_multitask(spec);
  ProblemManifest manifest;
  manifest.d = spec.d;
  manifest.c = spec.c;
  manifest.base_dir = dir;
  for (int k = 0; k < problem.num_tasks(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    TaskEntry entry;
    entry.format = TaskFileFormat::dense;
    entry.data_path = "task" + std::to_string(k) + ".txt";
    entry.label_path = "labels" + std::to_string(k) + ".txt";
    save_dense_matrix(problem.tasks[ku], dir / entry.data_path);
    save_labels(problem.labels[ku], dir / entry.label_path);
    save_labels(truth.outlier_indices[ku], dir / ("outliers" + std::to_string(k) + ".txt"));
    manifest.tasks.push_back(std::move(entry));
  }
  const auto manifest_path = dir / "manifest.txt";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

}  // namespace spmtc
