#include "spmtc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <string>

namespace spmtc {

namespace {

// Flip column signs so the largest-magnitude entry (lowest index on
// exact ties) is positive.
void apply_sign_convention(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index pivot = 0;
    double best = std::abs(vectors(0, j));
    for (Eigen::Index i = 1; i < vectors.rows(); ++i) {
      const double mag = std::abs(vectors(i, j));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (vectors(pivot, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

}  // namespace

std::pair<Vector, Matrix> eigh_ascending(const Matrix& symmetric, int l) {
  const Eigen::Index d = symmetric.rows();
  if (symmetric.cols() != d) throw DimensionError("eigh_ascending: matrix must be square");
  if (l < 1 || l > d) {
    throw DimensionError("eigh_ascending: l=" + std::to_string(l) + " outside [1, " +
                         std::to_string(d) + "]");
  }
  const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw InvalidInputError("eigh_ascending: input not symmetric (max|S - S^T| = " +
                            std::to_string(asym) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw InvalidInputError("eigh_ascending: eigendecomposition failed to converge");
  }
  // Eigen already orders eigenvalues ascending.
  Vector values = solver.eigenvalues().head(l);
  Matrix vectors = solver.eigenvectors().leftCols(l);
  apply_sign_convention(vectors);
  return {std::move(values), std::move(vectors)};
}

Matrix solve_regularized(const Matrix& a, const Matrix& b, double eps) {
  const Eigen::Index c = a.rows();
  if (a.cols() != c) throw DimensionError("solve_regularized: A must be square");
  if (b.cols() != c) {
    throw DimensionError("solve_regularized: B has " + std::to_string(b.cols()) +
                         " columns, expected " + std::to_string(c));
  }
  if (!(eps > 0.0)) throw InvalidInputError("solve_regularized: eps must be > 0");

  // X (A + eps I) = B  <=>  (A + eps I) X^T = B^T  (A symmetric).
  Matrix ridge = a + eps * Matrix::Identity(c, c);
  Eigen::PartialPivLU<Matrix> lu(ridge);
  return lu.solve(b.transpose()).transpose();
}

}  // namespace spmtc
