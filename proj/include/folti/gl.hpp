#pragma once

// Grünwald–Letnikov coefficients and the discrete fractional difference.

#include <span>

#include "folti/types.hpp"

namespace folti {

/// Per-state fractional orders. Every component lies in (0, 1].
class FracOrder {
 public:
  explicit FracOrder(Vec alpha);
  FracOrder(std::initializer_list<double> alpha);

  /// Commensurate order: the same value for all `n` components.
  static FracOrder commensurate(int n, double alpha);

  int size() const { return static_cast<int>(alpha_.size()); }
  double operator[](int i) const { return alpha_[i]; }
  const Vec& values() const { return alpha_; }
  Mat as_diagonal() const { return alpha_.asDiagonal(); }

  bool operator==(const FracOrder& other) const { return alpha_ == other.alpha_; }

 private:
  Vec alpha_;
};

/// GL coefficient psi(alpha, j) = Gamma(j - alpha) / (Gamma(-alpha) Gamma(j + 1)),
/// evaluated with the multiplicative recurrence psi_j = psi_{j-1} (j - 1 - alpha) / j.
/// Throws DomainError unless 0 < alpha <= 1 and j >= 0.
double psi(double alpha, int j);

/// D(alpha, j) = diag(psi(alpha_1, j), ..., psi(alpha_n, j)).
Mat d_matrix(const FracOrder& alpha, int j);

/// Precomputed n x (J+1) coefficient table, immutable once built.
class GlCoeffTable {
 public:
  GlCoeffTable(FracOrder alpha, int horizon);

  const FracOrder& alpha() const { return alpha_; }
  int horizon() const { return horizon_; }
  int dim() const { return alpha_.size(); }

  double psi(int i, int j) const { return table_(i, j); }
  /// Diagonal of D(alpha, j).
  auto d_diagonal(int j) const { return table_.col(j); }
  Mat d_matrix(int j) const { return table_.col(j).asDiagonal(); }
  const Mat& table() const { return table_; }

 private:
  FracOrder alpha_;
  int horizon_;
  Mat table_;
};

/// Delta^alpha x_k = sum_{j=0}^{k} D(alpha, j) x_{k-j} for history = x_0..x_k.
Vec gl_difference(const GlCoeffTable& table, std::span<const Vec> history);

}  // namespace folti
