#include "folti/gl.hpp"

#include <cmath>
#include <string>

#include "folti/error.hpp"

namespace folti {

namespace {

void check_order(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("fractional order must lie in (0, 1], got " + std::to_string(alpha));
  }
}

}  // namespace

FracOrder::FracOrder(Vec alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() == 0) throw DimensionError("fractional order vector is empty");
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) check_order(alpha_[i]);
}

FracOrder::FracOrder(std::initializer_list<double> alpha)
    : FracOrder(Vec(Eigen::Map<const Vec>(alpha.begin(), static_cast<Eigen::Index>(alpha.size())))) {}

FracOrder FracOrder::commensurate(int n, double alpha) {
  return FracOrder(Vec::Constant(n, alpha));
}

double psi(double alpha, int j) {
  check_order(alpha);
  if (j < 0) throw DomainError("lag index must be non-negative, got " + std::to_string(j));
  double value = 1.0;
  for (int k = 1; k <= j; ++k) {
    value *= (k - 1 - alpha) / k;
  }
  // Integer order: the binomial series terminates after the first difference.
  if (alpha == 1.0 && j >= 2) return 0.0;
  return value;
}

Mat d_matrix(const FracOrder& alpha, int j) {
  Vec diag(alpha.size());
  for (int i = 0; i < alpha.size(); ++i) diag[i] = psi(alpha[i], j);
  return diag.asDiagonal();
}

GlCoeffTable::GlCoeffTable(FracOrder alpha, int horizon)
    : alpha_(std::move(alpha)), horizon_(horizon) {
  if (horizon < 0) throw DomainError("coefficient table horizon must be non-negative");
  const int n = alpha_.size();
  table_.resize(n, horizon + 1);
  for (int i = 0; i < n; ++i) {
    const double a = alpha_[i];
    table_(i, 0) = 1.0;
    for (int j = 1; j <= horizon; ++j) {
      table_(i, j) = (a == 1.0 && j >= 2) ? 0.0 : table_(i, j - 1) * (j - 1 - a) / j;
    }
  }
}

Vec gl_difference(const GlCoeffTable& table, std::span<const Vec> history) {
  if (history.empty()) throw DimensionError("gl_difference needs at least x_0");
  const int k = static_cast<int>(history.size()) - 1;
  if (k > table.horizon()) {
    throw DimensionError("history longer than coefficient table horizon");
  }
  const int n = table.dim();
  Vec out = Vec::Zero(n);
  for (int j = 0; j <= k; ++j) {
    const Vec& x = history[k - j];
    if (x.size() != n) throw DimensionError("history vector length differs from order dimension");
    out += table.d_diagonal(j).cwiseProduct(x);
  }
  return out;
}

}  // namespace folti
