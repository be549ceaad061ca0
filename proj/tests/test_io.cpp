#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "spmtc/io.hpp"

using namespace spmtc;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_problem assembles a two-task manifest") {
  TempDir dir("spmtc_io_manifest");
  write_text(dir.path / "a.txt", "3 4\n1 2 3 4\n5 6 7 8\n9 10 11 12\n");
  write_text(dir.path / "b.txt", "3 5\n1 0 0 0 1\n0 1 0 1 0\n0 0 1 0 0\n");
  write_text(dir.path / "manifest.txt",
             "d = 3\nc = 2\ntask = dense,a.txt\ntask = dense,b.txt\n");

  const auto problem = load_problem(read_manifest(dir.path / "manifest.txt"));
  CHECK(problem.num_tasks() == 2);
  CHECK(problem.d == 3);
  CHECK(problem.n(0) == 4);
  CHECK(problem.n(1) == 5);
  CHECK(problem.tasks[0](1, 2) == 7.0);
  CHECK(problem.labels.empty());
}

TEST_CASE("load_problem reports the offending file on a dimension mismatch") {
  TempDir dir("spmtc_io_mismatch");
  write_text(dir.path / "bad.txt", "4 2\n1 2\n3 4\n5 6\n7 8\n");
  write_text(dir.path / "manifest.txt", "d = 3\nc = 1\ntask = dense,bad.txt\n");
  try {
    load_problem(read_manifest(dir.path / "manifest.txt"));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bad.txt") != std::string::npos);
  }
}

TEST_CASE("load_problem errors: missing file, label length mismatch, too many labels") {
  TempDir dir("spmtc_io_errors");
  write_text(dir.path / "manifest.txt", "d = 2\nc = 1\ntask = dense,absent.txt\n");
  CHECK_THROWS_AS(load_problem(read_manifest(dir.path / "manifest.txt")), IoError);

  write_text(dir.path / "x.txt", "2 3\n1 2 3\n4 5 6\n");
  write_text(dir.path / "y.txt", "0\n1\n");  // 2 labels for 3 examples
  write_text(dir.path / "manifest2.txt", "d = 2\nc = 2\ntask = dense,x.txt,y.txt\n");
  CHECK_THROWS_AS(load_problem(read_manifest(dir.path / "manifest2.txt")), FormatError);

  write_text(dir.path / "z.txt", "0\n1\n2\n");  // 3 distinct labels, c = 2
  write_text(dir.path / "manifest3.txt", "d = 2\nc = 2\ntask = dense,x.txt,z.txt\n");
  CHECK_THROWS_AS(load_problem(read_manifest(dir.path / "manifest3.txt")), FormatError);
}

TEST_CASE("labels are densified to 0..c-1") {
  TempDir dir("spmtc_io_densify");
  write_text(dir.path / "x.txt", "2 4\n1 2 3 4\n5 6 7 8\n");
  write_text(dir.path / "y.txt", "7\n-2\n7\n-2\n");
  write_text(dir.path / "manifest.txt", "d = 2\nc = 2\ntask = dense,x.txt,y.txt\n");
  const auto problem = load_problem(read_manifest(dir.path / "manifest.txt"));
  CHECK(problem.labels[0] == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("sparse-triplet files round-trip to the identical dense matrix") {
  TempDir dir("spmtc_io_sparse");
  Rng rng(3);
  Matrix x = oracles::random_matrix(rng, 4, 6);
  x(1, 2) = 0.0;
  x(3, 0) = 0.0;
  save_sparse_matrix(x, dir.path / "s.txt");
  save_dense_matrix(x, dir.path / "d.txt");

  const Matrix from_sparse = load_sparse_matrix(dir.path / "s.txt");
  const Matrix from_dense = load_dense_matrix(dir.path / "d.txt");
  CHECK((from_sparse - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((from_dense - x).cwiseAbs().maxCoeff() == 0.0);

  // Loaders are interchangeable through the manifest as well.
  write_text(dir.path / "manifest.txt",
             "d = 4\nc = 2\ntask = sparse-triplet,s.txt\ntask = dense,d.txt\n");
  const auto problem = load_problem(read_manifest(dir.path / "manifest.txt"));
  CHECK((problem.tasks[0] - problem.tasks[1]).cwiseAbs().maxCoeff() == 0.0);

  write_text(dir.path / "oob.txt", "2 2 1\n5 0 1.0\n");  // row 5 out of bounds
  CHECK_THROWS_AS(load_sparse_matrix(dir.path / "oob.txt"), FormatError);
}

TEST_CASE("normalization flag rescales every nonzero column to unit norm") {
  TempDir dir("spmtc_io_norm");
  write_text(dir.path / "x.txt", "2 3\n3 0 5\n4 0 12\n");
  write_text(dir.path / "manifest.txt",
             "d = 2\nc = 1\nnormalize = true\ntask = dense,x.txt\n");
  const auto problem = load_problem(read_manifest(dir.path / "manifest.txt"));
  CHECK(problem.tasks[0].col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(problem.tasks[0].col(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(problem.tasks[0].col(1).norm() == 0.0);
}

TEST_CASE("save_result writes assignments, trace, and a parsable header") {
  TempDir dir("spmtc_io_save");
  RunResult result;
  result.method = "spmtc-s";
  result.seed = 123456789012345ULL;
  result.config.seed = result.seed;
  result.config.mode = WeightingMode::soft;
  result.assignments = {{0, 1, 1, 0}, {2, 0, 1}};
  for (int i = 0; i < 3; ++i) {
    TraceRecord rec;
    rec.outer_round = 1;
    rec.inner_iter = i;
    rec.within = 10.0 - i;
    rec.cross = 5.0 - i;
    rec.total = 7.5 - i;
    rec.regularizer = 0.25;
    rec.selected_fraction = {0.5, 0.5};
    result.trace.push_back(rec);
  }
  result.wall_ms = 12.5;
  save_result(result, dir.path / "out");

  // Assignments round trip.
  CHECK(load_labels(dir.path / "out" / "assignments_task0.txt") ==
        std::vector<int>{0, 1, 1, 0});
  CHECK(load_labels(dir.path / "out" / "assignments_task1.txt") ==
        std::vector<int>{2, 0, 1});

  // Trace CSV has one header line plus one row per record.
  std::ifstream csv(dir.path / "out" / "trace.csv");
  std::string line;
  int lines = 0;
  std::string header;
  while (std::getline(csv, line)) {
    if (lines == 0) header = line;
    ++lines;
  }
  CHECK(lines == 4);
  CHECK(header == "outer_round,inner_iter,within,cross,total,reg,frac_0,frac_1");

  // Header recovers the exact seed.
  std::ifstream run(dir.path / "out" / "run.txt");
  std::uint64_t seed = 0;
  while (std::getline(run, line)) {
    std::istringstream stream(line);
    std::string key;
    stream >> key;
    if (key == "seed:") stream >> seed;
  }
  CHECK(seed == result.seed);
}

TEST_CASE("synth_multitask respects per-cluster counts and the remainder rule") {
  SynthSpec spec;
  spec.m = 2;
  spec.d = 5;
  spec.c = 3;
  spec.l_true = 2;
  spec.n = 11;  // 11 = 4 + 4 + 3
  spec.seed = 9;
  const auto [problem, truth] = synth_multitask(spec);
  for (int k = 0; k < 2; ++k) {
    std::vector<int> counts(3, 0);
    for (int y : problem.labels[static_cast<std::size_t>(k)]) ++counts[static_cast<std::size_t>(y)];
    CHECK(counts == std::vector<int>{4, 4, 3});
  }
  CHECK(truth.basis.cols() == 2);
  // Basis is orthonormal.
  CHECK((truth.basis.transpose() * truth.basis - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("synth_multitask is bit-identical under the same seed") {
  SynthSpec spec;
  spec.m = 2;
  spec.d = 6;
  spec.c = 2;
  spec.l_true = 2;
  spec.n = 20;
  spec.outlier_fraction = 0.1;
  spec.seed = 31337;
  const auto [p1, t1] = synth_multitask(spec);
  const auto [p2, t2] = synth_multitask(spec);
  for (int k = 0; k < 2; ++k) {
    CHECK((p1.tasks[static_cast<std::size_t>(k)] - p2.tasks[static_cast<std::size_t>(k)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(p1.labels[static_cast<std::size_t>(k)] == p2.labels[static_cast<std::size_t>(k)]);
    CHECK(t1.outlier_indices[static_cast<std::size_t>(k)] ==
          t2.outlier_indices[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("synth_multitask without outliers keeps points within 6 sd of their center") {
  // Valid per-point bound only in low ambient dimension: for d = 3,
  // P(chi2_3 > 36) ~ 7e-8, so 2000 points stay within 6 sd with margin.
  SynthSpec spec;
  spec.m = 1;
  spec.d = 3;
  spec.c = 4;
  spec.l_true = 2;
  spec.n = 2000;
  spec.noise_sd = 0.7;
  spec.separation = 30.0;
  spec.task_offset = 1.0;
  spec.outlier_fraction = 0.0;
  spec.seed = 4242;
  const auto [problem, truth] = synth_multitask(spec);

  int within = 0;
  for (int i = 0; i < spec.n; ++i) {
    const int label = problem.labels[0][static_cast<std::size_t>(i)];
    const double dist = (problem.tasks[0].col(i) - truth.centers[0].col(label)).norm();
    if (dist <= 6.0 * spec.noise_sd) ++within;
  }
  CHECK(static_cast<double>(within) / spec.n >= 0.999);
}

TEST_CASE("synth_multitask replaces the declared fraction with box outliers") {
  SynthSpec spec;
  spec.m = 2;
  spec.d = 8;
  spec.c = 2;
  spec.l_true = 2;
  spec.n = 40;
  spec.outlier_fraction = 0.05;
  spec.seed = 7;
  const auto [problem, truth] = synth_multitask(spec);
  for (int k = 0; k < 2; ++k) {
    CHECK(truth.outlier_indices[static_cast<std::size_t>(k)].size() == 2);  // floor(0.05*40)
    // Outliers keep their pre-replacement labels.
    for (int idx : truth.outlier_indices[static_cast<std::size_t>(k)]) {
      CHECK(problem.labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)] >= 0);
      CHECK(problem.labels[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)] < 2);
    }
  }
}

TEST_CASE("write_synth_problem produces a loadable manifest that matches memory") {
  TempDir dir("spmtc_io_gen");
  SynthSpec spec;
  spec.m = 2;
  spec.d = 4;
  spec.c = 2;
  spec.l_true = 2;
  spec.n = 10;
  spec.seed = 55;
  const auto manifest_path = write_synth_problem(spec, dir.path);
  const auto loaded = load_problem(read_manifest(manifest_path));
  const auto [direct, truth] = synth_multitask(spec);
  for (int k = 0; k < 2; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    CHECK((loaded.tasks[ku] - direct.tasks[ku]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.labels[ku] == direct.labels[ku]);
  }
}

TEST_CASE("read_key_values parses comments, blanks, and lists") {
  TempDir dir("spmtc_io_kv");
  write_text(dir.path / "f.txt",
             "# comment\n"
             "a = 1\n"
             "\n"
             "list = x, y ,z\n"
             "a = 2  # trailing comment\n");
  const auto entries = read_key_values(dir.path / "f.txt");
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].first == "a");
  CHECK(entries[0].second == "1");
  CHECK(split_list(entries[1].second) == std::vector<std::string>{"x", "y", "z"});
  CHECK(entries[2].second == "2");

  write_text(dir.path / "bad.txt", "no separator here\n");
  CHECK_THROWS_AS(read_key_values(dir.path / "bad.txt"), FormatError);
}

TEST_CASE("read_synth_spec validates fields") {
  TempDir dir("spmtc_io_spec");
  write_text(dir.path / "s.txt",
             "m = 2\nd = 6\nc = 2\nl_true = 3\nn = 12\nseparation = 4\n"
             "task_offset = 0.5\nnoise_sd = 0.25\noutlier_fraction = 0.1\nseed = 17\n");
  const auto spec = read_synth_spec(dir.path / "s.txt");
  CHECK(spec.m == 2);
  CHECK(spec.l_true == 3);
  CHECK(spec.noise_sd == 0.25);
  CHECK(spec.seed == 17);

  write_text(dir.path / "bad.txt", "m = 2\nd = 3\nc = 2\nl_true = 9\nn = 12\n");
  CHECK_THROWS_AS(read_synth_spec(dir.path / "bad.txt"), InvalidConfigError);
}
