#include "folti/toeplitz.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "folti/error.hpp"

namespace folti {

BlockToeplitz::BlockToeplitz(MatSeq first_col, MatSeq first_row)
    : first_col_(std::move(first_col)), first_row_(std::move(first_row)) {
  if (first_col_.empty()) throw DimensionError("block Toeplitz needs at least one block");
  if (first_col_.size() != first_row_.size()) {
    throw DimensionError("first block column and row differ in length");
  }
  block_size_ = static_cast<int>(first_col_[0].rows());
  for (const auto* seq : {&first_col_, &first_row_}) {
    for (const auto& b : *seq) {
      if (b.rows() != block_size_ || b.cols() != block_size_) {
        throw DimensionError("all generator blocks must be square of equal size");
      }
    }
  }
  if (first_col_[0] != first_row_[0]) {
    throw DimensionError("first block column and row must share block (0, 0)");
  }
}

BlockToeplitz BlockToeplitz::identity(int block_size, int num_blocks) {
  MatSeq col(num_blocks, Mat::Zero(block_size, block_size));
  col[0] = Mat::Identity(block_size, block_size);
  return {col, col};
}

BlockToeplitz BlockToeplitz::from_dense(const Mat& dense, int block_size) {
  if (block_size <= 0 || dense.rows() != dense.cols() || dense.rows() % block_size != 0) {
    throw DimensionError("dense matrix is not square with whole blocks");
  }
  const int t = static_cast<int>(dense.rows()) / block_size;
  MatSeq col, row;
  for (int d = 0; d < t; ++d) {
    col.push_back(dense.block(d * block_size, 0, block_size, block_size));
    row.push_back(dense.block(0, d * block_size, block_size, block_size));
  }
  return {col, row};
}

Mat BlockToeplitz::to_dense() const {
  const int n = block_size_;
  const int t = num_blocks();
  Mat out(dim(), dim());
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) out.block(i * n, j * n, n, n) = block(i, j);
  }
  return out;
}

bool is_block_toeplitz(const Mat& dense, int block_size, double abs_tol) {
  if (block_size <= 0 || dense.rows() != dense.cols() || dense.rows() % block_size != 0) {
    return false;
  }
  const int n = block_size;
  const int t = static_cast<int>(dense.rows()) / n;
  for (int i = 1; i < t; ++i) {
    for (int j = 1; j < t; ++j) {
      const auto diff = dense.block(i * n, j * n, n, n) - dense.block((i - 1) * n, (j - 1) * n, n, n);
      if (diff.cwiseAbs().maxCoeff() > abs_tol) return false;
    }
  }
  return true;
}

Mat StructuredOperator::to_dense() const {
  Mat out = base.to_dense();
  if (has_correction()) {
    const int n = base.block_size();
    const int last = base.num_blocks() - 1;
    for (int j = 0; j < base.num_blocks(); ++j) {
      out.block(last * n, j * n, n, n) += last_row_correction[j];
    }
  }
  return out;
}

namespace {

void check_length(const BlockToeplitz& t, const Vec& v) {
  if (v.size() != t.dim()) throw DimensionError("vector length differs from operator dimension");
}

// y_i = sum_j block(i, j) v_j for one block row.
void block_row_product(const BlockToeplitz& t, const Vec& v, int i, Vec& y) {
  const int n = t.block_size();
  auto yi = y.segment(i * n, n);
  yi.setZero();
  for (int j = 0; j < t.num_blocks(); ++j) {
    yi.noalias() += t.block(i, j) * v.segment(j * n, n);
  }
}

}  // namespace

Vec matvec_serial(const BlockToeplitz& t, const Vec& v) {
  check_length(t, v);
  Vec y(t.dim());
  for (int i = 0; i < t.num_blocks(); ++i) block_row_product(t, v, i, y);
  return y;
}

Vec matvec(const BlockToeplitz& t, const Vec& v) {
  check_length(t, v);
  Vec y(t.dim());
  const int rows = t.num_blocks();
#pragma omp parallel for schedule(static) if (rows >= 16)
  for (int i = 0; i < rows; ++i) block_row_product(t, v, i, y);
  return y;
}

Vec matvec(const StructuredOperator& op, const Vec& v) {
  Vec y = matvec(op.base, v);
  if (op.has_correction()) {
    const int n = op.base.block_size();
    const int last = op.base.num_blocks() - 1;
    for (int j = 0; j < op.base.num_blocks(); ++j) {
      y.segment(last * n, n).noalias() += op.last_row_correction[j] * v.segment(j * n, n);
    }
  }
  return y;
}

namespace {

using Operator = std::function<Vec(const Vec&)>;

SolveResult dense_solve(const Mat& dense, const Vec& rhs) {
  Eigen::PartialPivLU<Mat> lu(dense);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    throw SolverError("dense solve: matrix is singular to working precision", cond);
  }
  SolveResult result;
  result.x = lu.solve(rhs);
  const double rhs_norm = rhs.norm();
  const double res = (dense * result.x - rhs).norm();
  result.relative_residual = rhs_norm > 0.0 ? res / rhs_norm : res;
  if (!result.x.allFinite()) {
    throw SolverError("dense solve produced non-finite values", 1.0 / rcond);
  }
  return result;
}

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
SolveResult gmres(const Operator& apply, const Vec& rhs, double tol, int restart, int max_iter) {
  const Eigen::Index dim = rhs.size();
  SolveResult result;
  result.x = Vec::Zero(dim);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return result;

  restart = std::max(1, std::min<int>(restart, static_cast<int>(dim)));
  Vec r = rhs;
  double beta = rhs_norm;
  int total = 0;
  while (true) {
    Mat basis(dim, restart + 1);
    Mat hess = Mat::Zero(restart + 1, restart);
    Vec cs = Vec::Zero(restart), sn = Vec::Zero(restart);
    Vec g = Vec::Zero(restart + 1);
    g[0] = beta;
    basis.col(0) = r / beta;

    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      Vec w = apply(basis.col(k));
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = basis.col(i).dot(w);
        w -= hess(i, k) * basis.col(i);
      }
      hess(k + 1, k) = w.norm();
      if (hess(k + 1, k) > 0.0) basis.col(k + 1) = w / hess(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double tmp = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
        hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
        hess(i, k) = tmp;
      }
      const double denom = std::hypot(hess(k, k), hess(k + 1, k));
      cs[k] = denom > 0.0 ? hess(k, k) / denom : 1.0;
      sn[k] = denom > 0.0 ? hess(k + 1, k) / denom : 0.0;
      hess(k, k) = denom;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= tol * rhs_norm || denom == 0.0) {
        ++k;
        ++total;
        break;
      }
    }
    if (k > 0) {
      Vec y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
      result.x += basis.leftCols(k) * y;
    }
    r = rhs - apply(result.x);
    beta = r.norm();
    result.iterations = total;
    result.relative_residual = beta / rhs_norm;
    if (!std::isfinite(beta)) {
      throw SolverError("GMRES diverged", std::numeric_limits<double>::infinity(), beta, total);
    }
    if (result.relative_residual <= tol) return result;
    if (total >= max_iter || k == 0) {
      throw SolverError("GMRES did not converge within the iteration cap",
                        std::numeric_limits<double>::quiet_NaN(), result.relative_residual, total);
    }
  }
}

}  // namespace

SolveResult solve(const StructuredOperator& op, const Vec& rhs, const SolveOptions& options) {
  if (rhs.size() != op.dim()) throw DimensionError("right-hand side length differs from operator dimension");
  if (options.method == SolveMethod::kDense) return dense_solve(op.to_dense(), rhs);
  const int cap = options.max_iterations.value_or(10 * op.dim());
  return gmres([&op](const Vec& v) { return matvec(op, v); }, rhs, options.tol, options.restart, cap);
}

SolveResult solve(const BlockToeplitz& t, const Vec& rhs, const SolveOptions& options) {
  return solve(StructuredOperator{t, {}}, rhs, options);
}

}  // namespace folti
