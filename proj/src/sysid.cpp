#include "folti/sysid.hpp"

#include <Eigen/QR>

#include "folti/error.hpp"

namespace folti {

namespace {

void check_samples(const std::vector<TransitionSample>& samples, int& n, int& m) {
  if (samples.empty()) throw DimensionError("regression needs at least one sample");
  n = static_cast<int>(samples.front().x0.size());
  m = static_cast<int>(samples.front().u0.size());
  if (n == 0 || m == 0) throw DimensionError("empty state or input vectors");
  for (const auto& s : samples) {
    if (s.x0.size() != n || s.x1.size() != n || s.u0.size() != m) {
      throw DimensionError("sample dimensions are inconsistent");
    }
  }
}

}  // namespace

RegressionDesign build_regression(const RegressionData& data) {
  int n = 0, m = 0;
  check_samples(data.samples, n, m);
  const int p = static_cast<int>(data.samples.size());
  const int cols = n * n + n * m;

  RegressionDesign design;
  design.state_dim = n;
  design.input_dim = m;
  design.xi = Mat::Zero(p * n, cols);
  design.target.resize(p * n);
  design.underdetermined = p * n < cols;
  for (int i = 0; i < p; ++i) {
    const auto& s = data.samples[i];
    for (int r = 0; r < n; ++r) {
      const int row = i * n + r;
      design.xi.block(row, r * n, 1, n) = s.x0.transpose();
      design.xi.block(row, n * n + r * m, 1, m) = s.u0.transpose();
      design.target[row] = s.x1[r];
    }
  }
  return design;
}

IdentifiedParams estimate(const RegressionData& data, Convention convention,
                          const std::optional<Mat>& noise_cov) {
  const RegressionDesign design = build_regression(data);
  const int n = design.state_dim;
  const int m = design.input_dim;
  if (data.known_diag_a.size() != n) throw DimensionError("known diag(A) length differs from state dimension");

  Eigen::ColPivHouseholderQR<Mat> qr(design.xi);
  const int cols = static_cast<int>(design.xi.cols());
  if (qr.rank() < cols) {
    throw IdentifiabilityError("regression design is rank deficient: " + std::to_string(cols - qr.rank()) +
                                   "-dimensional null space",
                               cols - static_cast<int>(qr.rank()));
  }
  const Vec theta = qr.solve(design.target);

  IdentifiedParams out;
  out.a_alpha_hat.resize(n, n);
  out.b_hat.resize(n, m);
  for (int r = 0; r < n; ++r) {
    out.a_alpha_hat.row(r) = theta.segment(r * n, n).transpose();
    out.b_hat.row(r) = theta.segment(n * n + r * m, m).transpose();
  }
  const Vec diag_shift = out.a_alpha_hat.diagonal() - data.known_diag_a;
  out.alpha_hat = convention == Convention::kOrderAdded ? diag_shift : Vec(-diag_shift);
  out.residual_norm = (design.xi * theta - design.target).norm();
  if (noise_cov) out.theta_cov = theta_covariance(design.xi, *noise_cov, 1);
  return out;
}

Mat theta_covariance(const Mat& xi, const Mat& noise_cov, int n_repeats) {
  if (n_repeats < 1) throw DomainError("number of repetitions must be positive");
  const Eigen::Index n = noise_cov.rows();
  if (noise_cov.cols() != n || n == 0 || xi.rows() % n != 0) {
    throw DimensionError("noise covariance does not tile the design rows");
  }
  const Mat gram = xi.transpose() * xi;
  Eigen::LDLT<Mat> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
    throw IdentifiabilityError("xi^T xi is singular", -1);
  }
  Mat middle = Mat::Zero(xi.cols(), xi.cols());
  for (Eigen::Index i = 0; i < xi.rows(); i += n) {
    const auto block = xi.middleRows(i, n);
    middle.noalias() += block.transpose() * noise_cov * block;
  }
  const Mat left = ldlt.solve(middle);
  Mat cov = ldlt.solve(left.transpose()) / static_cast<double>(n_repeats);
  return 0.5 * (cov + cov.transpose());
}

FoltiModel model_from_estimate(const IdentifiedParams& params, const Vec& known_diag_a,
                               Convention convention, bool* clamped) {
  if (known_diag_a.size() != params.a_alpha_hat.rows()) throw DimensionError("known diag(A) has the wrong length");
  Vec alpha = params.alpha_hat.cwiseMax(1e-6).cwiseMin(1.0);
  if (clamped) *clamped = alpha != params.alpha_hat;
  // Keep the identified one-step matrix; diag(A) moves only when alpha was clamped.
  Mat a = params.a_alpha_hat;
  a.diagonal() += convention == Convention::kOrderSubtracted ? alpha : Vec(-alpha);
  return {a, params.b_hat, FracOrder(alpha), convention};
}

Mat estimate_input_matrix(const std::vector<TransitionSample>& samples, const Mat& a0) {
  int n = 0, m = 0;
  check_samples(samples, n, m);
  const int p = static_cast<int>(samples.size());
  Mat u(p, m), y(p, n);
  for (int i = 0; i < p; ++i) {
    u.row(i) = samples[i].u0.transpose();
    y.row(i) = (samples[i].x1 - a0 * samples[i].x0).transpose();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(u);
  if (qr.rank() < m) throw IdentifiabilityError("input design is rank deficient", m - static_cast<int>(qr.rank()));
  return qr.solve(y).transpose();
}

Mat input_design(const std::vector<TransitionSample>& samples, int state_dim) {
  if (samples.empty()) throw DimensionError("input design needs at least one sample");
  const int n = state_dim;
  const int m = static_cast<int>(samples.front().u0.size());
  const int p = static_cast<int>(samples.size());
  Mat phi = Mat::Zero(p * n, n * m);
  for (int i = 0; i < p; ++i) {
    for (int r = 0; r < n; ++r) phi.block(i * n + r, r * m, 1, m) = samples[i].u0.transpose();
  }
  return phi;
}

std::vector<TransitionSample> first_transitions(const std::vector<Trajectory>& trajectories) {
  std::vector<TransitionSample> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.horizon() < 1) throw DimensionError("trajectory has no transitions");
    out.push_back({t.states[0], t.inputs[0], t.states[1]});
  }
  return out;
}

LtiFit fit_lti(const std::vector<TransitionSample>& samples) {
  int n = 0, m = 0;
  check_samples(samples, n, m);
  const int p = static_cast<int>(samples.size());
  Mat z(p, n + m), y(p, n);
  for (int i = 0; i < p; ++i) {
    z.row(i).head(n) = samples[i].x0.transpose();
    z.row(i).tail(m) = samples[i].u0.transpose();
    y.row(i) = samples[i].x1.transpose();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(z);
  if (qr.rank() < n + m) {
    throw IdentifiabilityError("LTI regression is rank deficient", n + m - static_cast<int>(qr.rank()));
  }
  const Mat theta = qr.solve(y);  // (n+m) x n
  return {theta.topRows(n).transpose(), theta.bottomRows(m).transpose()};
}

}  // namespace folti
