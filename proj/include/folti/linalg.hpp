#pragma once

#include "folti/types.hpp"

namespace folti {

/// Largest singular value.
double spectral_norm(const Mat& m);
/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Mat& m);
double min_symmetric_eigenvalue(const Mat& m);
bool is_symmetric(const Mat& m, double rel_tol = 1e-12);

/// Block-diagonal matrix with `count` copies of `block`.
Mat block_diagonal(const Mat& block, int count);

/// Concatenates a sequence of vectors into one column.
Vec stack(const VecSeq& seq);
/// Splits a column into consecutive blocks of length `block`.
VecSeq unstack(const Vec& v, int block);

}  // namespace folti
