#pragma once

#include "libra/types.hpp"

namespace libra {

/// Standard symplectic form [[0, I], [-I, 0]] of size 2d.
Mat symplectic_J(int d);

/// Largest absolute entry.
double max_abs(const Mat& m);

/// Half-dimension of a square even-sized matrix; DimensionError otherwise.
int half_dim(const Mat& m);

/// Orthonormal basis (columns) of the null space of A, singular values below
/// tol * max(1, sigma_max) count as zero.
Mat null_space(const Mat& A, double tol);

/// Orthonormal basis of the column space of A with the same rank convention.
Mat range_space(const Mat& A, double tol);

int numerical_rank(const Mat& A, double tol);

/// 2-norm condition number; infinity for singular input.
double condition_number(const Mat& A);

/// Smallest singular value.
double sigma_min(const Mat& A);

/// Inverse through a full-pivot LU with a condition guard.
Mat guarded_inverse(const Mat& A, double max_cond = 1e12);

}  // namespace libra
