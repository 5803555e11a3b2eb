#pragma once

// Block-Toeplitz operators and solvers for the Lagrange stationarity system.

#include <optional>

#include "folti/types.hpp"

namespace folti {

/// Block (i, j) is first_col[i - j] for i >= j and first_row[j - i] for j >= i.
class BlockToeplitz {
 public:
  BlockToeplitz(MatSeq first_col, MatSeq first_row);

  static BlockToeplitz identity(int block_size, int num_blocks);
  /// Reads the generators from the first block column and row of `dense`.
  /// Does not check the remaining blocks; see is_block_toeplitz.
  static BlockToeplitz from_dense(const Mat& dense, int block_size);

  int block_size() const { return block_size_; }
  int num_blocks() const { return static_cast<int>(first_col_.size()); }
  int dim() const { return block_size_ * num_blocks(); }
  const MatSeq& first_col() const { return first_col_; }
  const MatSeq& first_row() const { return first_row_; }
  const Mat& block(int i, int j) const { return i >= j ? first_col_[i - j] : first_row_[j - i]; }

  Mat to_dense() const;

 private:
  int block_size_;
  MatSeq first_col_;
  MatSeq first_row_;
};

/// True when every block diagonal of `dense` is constant (within abs_tol).
bool is_block_toeplitz(const Mat& dense, int block_size, double abs_tol = 0.0);

/// Block-Toeplitz matrix plus an additive correction confined to the last
/// block row (num_blocks blocks, or empty for none).
struct StructuredOperator {
  BlockToeplitz base;
  MatSeq last_row_correction;

  int dim() const { return base.dim(); }
  bool has_correction() const { return !last_row_correction.empty(); }
  Mat to_dense() const;
};

/// Block-row parallel product (OpenMP). O(T^2 n^2) time, O(T n^2) storage.
Vec matvec(const BlockToeplitz& t, const Vec& v);
Vec matvec(const StructuredOperator& op, const Vec& v);
/// Single-threaded reference product, kept for tests and benchmarks.
Vec matvec_serial(const BlockToeplitz& t, const Vec& v);

enum class SolveMethod { kDense, kIterative };

struct SolveOptions {
  SolveMethod method = SolveMethod::kDense;
  double tol = 1e-10;
  int restart = 50;
  /// Total inner-iteration cap; unset means 10 * dim.
  std::optional<int> max_iterations;
};

struct SolveResult {
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Dense: LU of the materialized matrix; throws SolverError with a condition
/// estimate when singular. Iterative: restarted GMRES on the structured
/// product; throws SolverError with the last residual on non-convergence.
SolveResult solve(const StructuredOperator& op, const Vec& rhs, const SolveOptions& options = {});
SolveResult solve(const BlockToeplitz& t, const Vec& rhs, const SolveOptions& options = {});

}  // namespace folti
