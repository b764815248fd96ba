#pragma once

#include "mwlab/types.hpp"

namespace mwlab {

/// Relative eigenvalue floor below which a matrix is rejected as not SPD.
inline constexpr double kSpdRelTol = 1e-12;

/// 0.5 * (M + M^T).
Matrix symmetrized(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-9);

/// True iff m is symmetric with min eigenvalue > rel_tol * max eigenvalue.
bool is_spd(const Matrix& m, double rel_tol = kSpdRelTol);

/// M^s for symmetric positive definite M, by eigendecomposition.
/// Throws NotSpdError if an eigenvalue falls at or below the relative floor.
Matrix spd_power(const Matrix& m, double s);

/// Eigen-based square root of a positive semidefinite matrix; eigenvalues in
/// [-tol, 0) are clamped to zero, anything lower throws NotSpdError.
Matrix psd_sqrt(const Matrix& m);

/// Largest eigenvalue of a symmetric matrix.
double lambda_max(const Matrix& m);
double lambda_min(const Matrix& m);

/// Spectral norm (largest singular value) of an arbitrary matrix.
double spectral_norm(const Matrix& m);

/// Squared spectral norm of A^(1/2) B^(1/2) for SPD A, B, computed as the top
/// eigenvalue of the symmetric product B^(1/2) A B^(1/2).
double sym_product_norm_sq(const Matrix& a, const Matrix& b);

}  // namespace mwlab
