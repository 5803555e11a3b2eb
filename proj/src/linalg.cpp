#include "folti/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "folti/error.hpp"

namespace folti {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()[0];
}

double spectral_radius(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral radius needs a square matrix");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_symmetric_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Mat block_diagonal(const Mat& block, int count) {
  Mat out = Mat::Zero(block.rows() * count, block.cols() * count);
  for (int i = 0; i < count; ++i) {
    out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
  }
  return out;
}

Vec stack(const VecSeq& seq) {
  Eigen::Index total = 0;
  for (const auto& v : seq) total += v.size();
  Vec out(total);
  Eigen::Index offset = 0;
  for (const auto& v : seq) {
    out.segment(offset, v.size()) = v;
    offset += v.size();
  }
  return out;
}

VecSeq unstack(const Vec& v, int block) {
  if (block <= 0 || v.size() % block != 0) throw DimensionError("vector does not split into whole blocks");
  VecSeq out;
  for (Eigen::Index i = 0; i < v.size(); i += block) out.push_back(v.segment(i, block));
  return out;
}

}  // namespace folti
