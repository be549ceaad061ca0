#pragma once

#include <utility>

#include "spmtc/types.hpp"

namespace spmtc {

// Eigen-decomposition of a symmetric matrix, bottom of the spectrum.
// Returns the l smallest eigenvalues in ascending order and the matching
// orthonormal eigenvectors as columns. Deterministic sign convention:
// the largest-magnitude entry of each column is positive, ties broken by
// the lowest row index.
//
// Throws InvalidInputError if max|S - S^T| > 1e-10, DimensionError if
// l is outside [1, d].
std::pair<Vector, Matrix> eigh_ascending(const Matrix& symmetric, int l);

// Solves X (A + eps I) = B for X, i.e. X = B (A + eps I)^{-1}, with A
// symmetric c x c and B of shape r x c. The ridge keeps the system
// solvable when A is singular (empty weighted cluster).
//
// Throws DimensionError on shape mismatch, InvalidInputError if eps <= 0.
Matrix solve_regularized(const Matrix& a, const Matrix& b, double eps);

}  // namespace spmtc
