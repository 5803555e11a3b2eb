#include "folti/lqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "folti/error.hpp"
#include "folti/linalg.hpp"

namespace folti {

namespace {

void check_psd(const Mat& m, const char* name) {
  if (!is_symmetric(m, 1e-10)) throw DomainError(std::string(name) + " must be symmetric");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (min_symmetric_eigenvalue(m) < -1e-10 * scale) {
    throw DomainError(std::string(name) + " must be positive semidefinite");
  }
}

}  // namespace

CostSpec::CostSpec(Mat q, Mat r, Mat q_f) : q_(std::move(q)), r_(std::move(r)), q_f_(std::move(q_f)) {
  if (q_.rows() != q_.cols() || q_f_.rows() != q_f_.cols() || r_.rows() != r_.cols()) {
    throw DimensionError("cost matrices must be square");
  }
  if (q_.rows() != q_f_.rows()) throw DimensionError("Q and Q_f dimensions differ");
  check_psd(q_, "Q");
  check_psd(q_f_, "Q_f");
  if (!is_symmetric(r_, 1e-10)) throw DomainError("R must be symmetric");
  if (r_.rows() == 0 || min_symmetric_eigenvalue(r_) <= 0.0) {
    throw DomainError("R must be positive definite (semidefinite R is not supported)");
  }
}

CostSpec::CostSpec(Mat q, Mat r) : CostSpec(q, std::move(r), q) {}

std::string to_string(ControlMethod m) {
  switch (m) {
    case ControlMethod::kLeastSquares: return "least-squares";
    case ControlMethod::kLagrange: return "lagrange";
    case ControlMethod::kRiccatiOracle: return "riccati-oracle";
  }
  return "unknown";
}

namespace {

void check_dims(const FoltiModel& model, const PropagatorSet& props, const CostSpec& cost, int horizon) {
  if (horizon < 1) throw DomainError("control horizon must be at least 1");
  if (props.horizon() < horizon) throw DimensionError("propagator horizon shorter than control horizon");
  if (cost.state_dim() != model.state_dim() || cost.input_dim() != model.input_dim()) {
    throw DimensionError("cost dimensions differ from model dimensions");
  }
}

}  // namespace

StackedSystem build_stacked(const FoltiModel& model, const PropagatorSet& props, const CostSpec& cost,
                            int horizon) {
  check_dims(model, props, cost, horizon);
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int t = horizon;

  StackedSystem sys;
  sys.horizon = t;
  sys.state_dim = n;
  sys.input_dim = m;
  sys.g_big = Mat::Zero((t + 1) * n, t * m);
  sys.g_d = Mat::Zero((t + 1) * n, t * n);
  sys.h_big.resize((t + 1) * n, n);

  MatSeq gb(t);
  for (int k = 0; k < t; ++k) gb[k] = props.g[k] * model.b();

  // Block row k (k >= 1) holds G_{k-1}, ..., G_0 followed by zeros.
#pragma omp parallel for schedule(static) if (t >= 16)
  for (int k = 0; k <= t; ++k) {
    sys.h_big.block(k * n, 0, n, n) = props.g[k];
    for (int j = 0; j < k; ++j) {
      sys.g_d.block(k * n, j * n, n, n) = props.g[k - 1 - j];
      sys.g_big.block(k * n, j * m, n, m) = gb[k - 1 - j];
    }
  }

  sys.q_bar = Mat::Zero((t + 1) * n, (t + 1) * n);
  for (int k = 0; k < t; ++k) sys.q_bar.block(k * n, k * n, n, n) = cost.q();
  sys.q_bar.block(t * n, t * n, n, n) = cost.q_f();
  sys.r_bar = block_diagonal(cost.r(), t);
  return sys;
}

namespace {

// Symmetric square root of a PSD matrix.
Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

ControlSolution solve_least_squares(const StackedSystem& sys, const Vec& x0) {
  if (x0.size() != sys.state_dim) throw DimensionError("x0 length differs from state dimension");
  const int n = sys.state_dim, m = sys.input_dim, t = sys.horizon;
  const Vec hx = sys.h_big * x0;

  // The triangular factor of [Qbar^{1/2} G; Rbar^{1/2}] is the Cholesky factor of
  // G^T Qbar G + Rbar; taking it from a QR avoids squaring the condition number.
  const Mat sq = psd_sqrt(sys.q_bar.topLeftCorner(n, n));
  const Mat sq_f = psd_sqrt(sys.q_bar.bottomRightCorner(n, n));
  Eigen::LLT<Mat> r_llt(sys.r_bar.topLeftCorner(m, m));
  if (r_llt.info() != Eigen::Success) {
    throw SolverError("R is not positive definite", std::numeric_limits<double>::infinity());
  }
  const Mat sr = r_llt.matrixU();

  const int rows_x = (t + 1) * n;
  Mat w = Mat::Zero(rows_x + t * m, t * m);
  Vec rhs = Vec::Zero(rows_x + t * m);
  for (int k = 0; k <= t; ++k) {
    const Mat& s = k == t ? sq_f : sq;
    w.block(k * n, 0, n, t * m) = s * sys.g_big.middleRows(k * n, n);
    rhs.segment(k * n, n) = -(s * hx.segment(k * n, n));
  }
  for (int k = 0; k < t; ++k) w.block(rows_x + k * m, k * m, m, m) = sr;

  Eigen::HouseholderQR<Mat> qr(w);
  const Vec u = qr.solve(rhs);
  if (!u.allFinite()) throw SolverError("least-squares solve produced non-finite values", 0.0);

  const Vec x = sys.g_big * u + hx;
  ControlSolution sol;
  sol.method = ControlMethod::kLeastSquares;
  sol.u = unstack(u, sys.input_dim);
  sol.cost = x.dot(sys.q_bar * x) + u.dot(sys.r_bar * u);
  return sol;
}

LagrangeSystem build_lagrange(const FoltiModel& model, const PropagatorSet& props, const CostSpec& cost,
                              int horizon) {
  check_dims(model, props, cost, horizon);
  const int n = model.state_dim();
  const int t = horizon;

  Eigen::LLT<Mat> r_llt(cost.r());
  if (r_llt.info() != Eigen::Success) {
    throw SolverError("R is singular", std::numeric_limits<double>::infinity());
  }
  const Mat r_inv_bt = r_llt.solve(model.b().transpose());
  const Mat brb = model.b() * r_inv_bt;  // B R^{-1} B^T

  // G_d B R^{-1} B^T for every lag, shared by the dense matrix and the operator.
  MatSeq gbrb(t);
  for (int d = 0; d < t; ++d) gbrb[d] = props.g[d] * brb;

  LagrangeSystem lsys{t, n, Mat::Zero(t * n, t * n), Mat(t * n, n),
                      StructuredOperator{BlockToeplitz::identity(n, 1), {}}, r_inv_bt, cost};

#pragma omp parallel for schedule(static) if (t >= 16)
  for (int r = 0; r < t; ++r) {
    const Mat& qr = (r == t - 1) ? cost.q_f() : cost.q();
    for (int c = 0; c <= r; ++c) lsys.g_lambda.block(r * n, c * n, n, n) = -qr * gbrb[r - c];
    for (int c = r + 1; c < t; ++c) {
      lsys.g_lambda.block(r * n, c * n, n, n) = props.a_seq[c - r - 1].transpose();
    }
    lsys.h_lambda.block(r * n, 0, n, n) = qr * props.g[r + 1];
  }

  MatSeq col(t), row(t);
  const Mat eye = Mat::Identity(n, n);
  for (int d = 0; d < t; ++d) {
    col[d] = cost.q() * gbrb[d];
    if (d == 0) col[d] += eye;
    row[d] = d == 0 ? col[0] : Mat(-props.a_seq[d - 1].transpose());
  }
  MatSeq correction;
  if (!cost.terminal_equals_stage()) {
    const Mat dq = cost.q_f() - cost.q();
    correction.resize(t);
    for (int c = 0; c < t; ++c) correction[c] = dq * gbrb[t - 1 - c];
  }
  lsys.system = StructuredOperator{BlockToeplitz(std::move(col), std::move(row)), std::move(correction)};
  return lsys;
}

ControlSolution solve_lagrange(const LagrangeSystem& lsys, const FoltiModel& model, const Vec& x0,
                               const SolveOptions& options) {
  if (x0.size() != lsys.state_dim) throw DimensionError("x0 length differs from state dimension");
  const Vec rhs = 2.0 * (lsys.h_lambda * x0);
  const SolveResult lambda = solve(lsys.system, rhs, options);

  const int n = lsys.state_dim;
  ControlSolution sol;
  sol.method = ControlMethod::kLagrange;
  sol.u.reserve(lsys.horizon);
  for (int k = 0; k < lsys.horizon; ++k) {
    sol.u.push_back(-0.5 * (lsys.r_inv_bt * lambda.x.segment(k * n, n)));
  }
  sol.cost = eval_cost(simulate(model, x0, sol.u), lsys.cost);
  return sol;
}

double eval_cost(const Trajectory& traj, const CostSpec& cost) {
  traj.validate(cost.state_dim(), cost.input_dim());
  const int t = traj.horizon();
  double j = 0.0;
  for (int k = 0; k < t; ++k) {
    j += traj.states[k].dot(cost.q() * traj.states[k]) + traj.inputs[k].dot(cost.r() * traj.inputs[k]);
  }
  j += traj.states[t].dot(cost.q_f() * traj.states[t]);
  return j;
}

ControlSolution riccati_oracle(const Mat& a_eff, const Mat& b, const CostSpec& cost, int horizon,
                               const Vec& x0) {
  if (horizon < 1) throw DomainError("control horizon must be at least 1");
  if (a_eff.rows() != a_eff.cols() || b.rows() != a_eff.rows() || x0.size() != a_eff.rows() ||
      cost.state_dim() != a_eff.rows() || cost.input_dim() != b.cols()) {
    throw DimensionError("riccati oracle dimensions are inconsistent");
  }
  MatSeq gains(horizon);
  Mat p = cost.q_f();
  for (int k = horizon - 1; k >= 0; --k) {
    const Mat s = cost.r() + b.transpose() * p * b;
    Eigen::LDLT<Mat> ldlt(s);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SolverError("R + B^T P B is singular", std::numeric_limits<double>::infinity());
    }
    gains[k] = ldlt.solve(b.transpose() * p * a_eff);
    p = cost.q() + a_eff.transpose() * p * (a_eff - b * gains[k]);
    p = 0.5 * (p + p.transpose());
  }

  Trajectory traj;
  traj.states.push_back(x0);
  for (int k = 0; k < horizon; ++k) {
    traj.inputs.push_back(-gains[k] * traj.states[k]);
    traj.states.push_back(a_eff * traj.states[k] + b * traj.inputs[k]);
  }
  ControlSolution sol;
  sol.method = ControlMethod::kRiccatiOracle;
  sol.cost = eval_cost(traj, cost);
  sol.u = std::move(traj.inputs);
  return sol;
}

ControlSolution solve_control(const FoltiModel& model, const CostSpec& cost, const Vec& x0, int horizon,
                              ControlMethod method, const SolveOptions& options) {
  const PropagatorSet props = propagators(model, horizon);
  switch (method) {
    case ControlMethod::kLeastSquares:
      return solve_least_squares(build_stacked(model, props, cost, horizon), x0);
    case ControlMethod::kLagrange:
      return solve_lagrange(build_lagrange(model, props, cost, horizon), model, x0, options);
    case ControlMethod::kRiccatiOracle:
      return riccati_oracle(model.one_step_matrix(), model.b(), cost, horizon, x0);
  }
  throw ConfigError("unknown control method");
}

}  // namespace folti
