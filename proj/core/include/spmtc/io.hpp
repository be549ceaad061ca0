#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spmtc/driver.hpp"
#include "spmtc/types.hpp"

namespace spmtc {

enum class TaskFileFormat { dense, sparse_triplet };

struct TaskEntry {
  std::string data_path;
  std::string label_path;  // empty when labels are absent
  TaskFileFormat format = TaskFileFormat::dense;
};

// On-disk description of a multi-task problem. Relative paths resolve
// against base_dir (the manifest file's directory).
struct ProblemManifest {
  std::vector<TaskEntry> tasks;
  int d = 0;
  int c = 0;
  bool normalize = false;  // per-example unit 2-norm scaling at load
  std::filesystem::path base_dir;
};

// Synthetic multi-task generator parameters. Clusters live in a shared
// l_true-dimensional subspace; outliers replace a fraction of points with
// uniform draws over an inflated bounding box.
struct SynthSpec {
  int m = 2;
  int d = 20;
  int c = 3;
  int l_true = 2;
  int n = 120;                   // examples per task
  double separation = 8.0;       // pairwise center spacing, subspace units
  double task_offset = 0.0;      // scale of the per-task center shift
  double noise_sd = 1.0;
  double outlier_fraction = 0.0; // in [0, 0.5)
  std::uint64_t seed = 0;

  void validate() const;
};

// Ground truth emitted alongside a generated problem.
struct SynthTruth {
  Matrix basis;                              // d x l_true, orthonormal
  std::vector<Matrix> centers;               // per task, d x c (offset applied)
  std::vector<std::vector<int>> outlier_indices;
};

// -- matrix files ------------------------------------------------------
// Dense format:          header "d n", then d rows of n values.
// Sparse triplet format: header "d n nnz", then nnz lines "row col value"
// (0-indexed); unlisted entries are zero.
Matrix load_dense_matrix(const std::filesystem::path& path);
Matrix load_sparse_matrix(const std::filesystem::path& path);
void save_dense_matrix(const Matrix& x, const std::filesystem::path& path);
void save_sparse_matrix(const Matrix& x, const std::filesystem::path& path);

std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

// -- key:value files ----------------------------------------------------
// Plain-text "key = value" lines; '#' starts a comment; lists are
// comma-separated. Later duplicate keys are collected in order.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(const std::filesystem::path& path);
std::vector<std::string> split_list(const std::string& value);

ProblemManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const ProblemManifest& manifest, const std::filesystem::path& path);
SynthSpec read_synth_spec(const std::filesystem::path& path);

// -- operations ----------------------------------------------------------
// Assembles the problem described by a manifest: d-row task matrices,
// labels densified to {0,...,c-1}, optional unit-norm columns.
MultiTaskProblem load_problem(const ProblemManifest& manifest);

// Writes assignments (one file per task), the objective trace CSV
// (outer_round,inner_iter,within,cross,total,reg,frac_...), and a
// key:value run header (config echo, seed, wall time) into `dir`.
void save_result(const RunResult& result, const std::filesystem::path& dir);

// Draws the planted problem: orthonormal basis, polygon-spaced centers in
// the subspace, per-task center offsets, isotropic noise, optional
// box-uniform outliers keeping their pre-replacement labels.
std::pair<MultiTaskProblem, SynthTruth> synth_multitask(const SynthSpec& spec);

// Writes generated task files, label files, outlier index files, and a
// manifest into `dir`; returns the manifest path.
std::filesystem::path write_synth_problem(const SynthSpec& spec,
                                          const std::filesystem::path& dir);

}  // namespace spmtc
