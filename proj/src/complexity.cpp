#include "folti/complexity.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "folti/dataset_io.hpp"
#include "folti/error.hpp"
#include "folti/linalg.hpp"

namespace folti {

void BoundInputs::validate() const {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (cost.state_dim() != n || cost.input_dim() != m) throw ConfigError("cost: dimensions differ from model");
  if (x0.size() != n) throw ConfigError("x0: length differs from state dimension");
  if (horizon < 1) throw ConfigError("T: must be at least 1");
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) throw ConfigError("sigma: must be finite and non-negative");
  if (p <= m + 1) throw ConfigError("p: must exceed m + 1 (got p=" + std::to_string(p) + ", m=" + std::to_string(m) + ")");
  if (n_batches < 1) throw ConfigError("N: must be at least 1");
}

BoundOperators assemble_operators(const BoundInputs& inputs) {
  const int n = inputs.model.state_dim();
  const int m = inputs.model.input_dim();
  const int t = inputs.horizon;
  if (t < 1) throw DomainError("horizon must be at least 1");
  if (inputs.x0.size() != n) throw DimensionError("x0 length differs from state dimension");

  const PropagatorSet props = propagators(inputs.model, t);
  const StackedSystem sys = build_stacked(inputs.model, props, inputs.cost, t);

  BoundOperators ops;
  ops.state_dim = n;
  ops.input_dim = m;
  ops.horizon = t;
  const Vec hx = sys.h_big * inputs.x0;
  const Mat qg = sys.q_bar * sys.g_d;
  ops.z = qg.transpose() * hx;
  ops.s = sys.g_d.transpose() * qg;
  ops.p_block = Mat::Zero(t * n, t * m);
  for (int k = 0; k < t; ++k) ops.p_block.block(k * n, k * m, n, m) = inputs.model.b();
  ops.r_bar = sys.r_bar;
  ops.offset = hx.dot(sys.q_bar * hx);

  ops.l_qg = Mat::Zero(t * n, t * n);
  ops.l_u = Mat::Zero(t * n, t * n);
  ops.h_lambda_x0.resize(t * n);
  for (int r = 0; r < t; ++r) {
    const Mat& qr = r == t - 1 ? inputs.cost.q_f() : inputs.cost.q();
    for (int c = 0; c <= r; ++c) ops.l_qg.block(r * n, c * n, n, n) = qr * props.g[r - c];
    for (int c = r + 1; c < t; ++c) ops.l_u.block(r * n, c * n, n, n) = props.a_seq[c - r - 1].transpose();
    ops.h_lambda_x0.segment(r * n, n) = qr * (props.g[r + 1] * inputs.x0);
  }

  ops.norm_b = spectral_norm(inputs.model.b());
  Eigen::LLT<Mat> r_llt(inputs.cost.r());
  ops.norm_r_inv = spectral_norm(r_llt.solve(Mat::Identity(m, m)));
  return ops;
}

double trace_kb_closed(int n, int m, double sigma_w, int n_batches, int p) {
  if (p <= m + 1) {
    throw DomainError("trace_kb_closed needs p > m + 1 (inverse-Wishart mean undefined for p=" +
                      std::to_string(p) + ", m=" + std::to_string(m) + ")");
  }
  if (n_batches < 1) throw DomainError("trace_kb_closed needs N >= 1");
  return n * m * sigma_w * sigma_w / (n_batches * static_cast<double>(p - m - 1));
}

double trace_kb_general(const Mat& phi, const Mat& noise_cov, int n_batches) {
  const Eigen::Index n = noise_cov.rows();
  if (n == 0 || noise_cov.cols() != n || phi.rows() % n != 0) {
    throw DimensionError("phi rows must be a multiple of the noise covariance size");
  }
  if (n_batches < 1) throw DomainError("trace_kb_general needs N >= 1");
  const Mat gram = phi.transpose() * phi;
  Eigen::LDLT<Mat> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() <= std::numeric_limits<double>::epsilon()) {
    throw IdentifiabilityError("phi^T phi is singular", -1);
  }
  Mat kphi(phi.rows(), phi.cols());
  for (Eigen::Index i = 0; i < phi.rows() / n; ++i) {
    kphi.middleRows(i * n, n) = noise_cov * phi.middleRows(i * n, n);
  }
  const Mat middle = phi.transpose() * kphi;
  const Mat left = ldlt.solve(middle);
  const Mat sandwich = ldlt.solve(left.transpose());
  return sandwich.trace() / n_batches;
}

namespace {

double estimation_factor(const BoundOperators& ops, double trace_kb) {
  if (trace_kb < 0.0) throw DomainError("trace_kb must be non-negative");
  return trace_kb + 2.0 * ops.norm_b * std::sqrt(trace_kb);
}

}  // namespace

double bound_least_squares(const BoundOperators& ops, double trace_kb) {
  const double z2 = ops.z.squaredNorm();
  const double s = spectral_norm(ops.s);
  return z2 * ops.norm_r_inv * (1.0 + ops.norm_b * ops.norm_b * ops.norm_r_inv * s) *
         estimation_factor(ops, trace_kb);
}

double bound_least_squares(const BoundInputs& inputs, double trace_kb) {
  return bound_least_squares(assemble_operators(inputs), trace_kb);
}

LagrangeBound bound_lagrange(const BoundOperators& ops, double trace_kb) {
  const double factor = estimation_factor(ops, trace_kb);
  Eigen::JacobiSVD<Mat> svd(ops.l_qg);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > smax * sv.size() * std::numeric_limits<double>::epsilon())) {
    throw SolverError("L_QG is singular", smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
  }

  const Eigen::Index dim = ops.l_qg.rows();
  const Mat m = ops.l_qg.partialPivLu().solve(Mat::Identity(dim, dim) - ops.l_u);
  const Mat sym = 0.5 * (m + m.transpose());

  LagrangeBound out;
  out.min_symmetric_eigenvalue = min_symmetric_eigenvalue(sym);
  out.min_real_eigenvalue = Eigen::EigenSolver<Mat>(m, false).eigenvalues().real().minCoeff();
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  out.assumption_holds = out.min_symmetric_eigenvalue >= -tol;
  if (!out.assumption_holds) return out;

  const double l_norm = smax / smin;  // ||L_QG^{-1}|| ||L_QG||
  out.value = ops.z.norm() * ops.h_lambda_x0.norm() * ops.norm_r_inv * l_norm *
              (1.0 + ops.norm_b * ops.norm_b * ops.norm_r_inv * l_norm * smax) * factor;
  return out;
}

LagrangeBound bound_lagrange(const BoundInputs& inputs, double trace_kb) {
  return bound_lagrange(assemble_operators(inputs), trace_kb);
}

namespace {

Mat expand_b(const BoundOperators& ops, const Mat& b) {
  const int n = ops.state_dim, m = ops.input_dim;
  if (b.rows() != n || b.cols() != m) throw DimensionError("B has the wrong shape");
  Mat p = Mat::Zero(ops.horizon * n, ops.horizon * m);
  for (int k = 0; k < ops.horizon; ++k) p.block(k * n, k * m, n, m) = b;
  return p;
}

// U = -(P^T S P + Rbar)^{-1} P^T z along with the factorized normal matrix.
struct Controller {
  Mat normal;
  Vec pz;
  Vec u;
};

Controller controller(const BoundOperators& ops, const Mat& p) {
  Controller c;
  c.normal = p.transpose() * ops.s * p + ops.r_bar;
  c.pz = p.transpose() * ops.z;
  Eigen::LLT<Mat> llt(c.normal);
  if (llt.info() != Eigen::Success) throw SolverError("normal matrix is not positive definite", 0.0);
  c.u = -llt.solve(c.pz);
  return c;
}

}  // namespace

double plug_in_cost(const BoundOperators& ops, const Mat& b) {
  const Controller c = controller(ops, expand_b(ops, b));
  return ops.offset + c.pz.dot(c.u);
}

double rollout_cost(const BoundOperators& ops, const Mat& b_hat) {
  const Vec u = controller(ops, expand_b(ops, b_hat)).u;
  const Mat normal = ops.p_block.transpose() * ops.s * ops.p_block + ops.r_bar;
  return u.dot(normal * u) + 2.0 * u.dot(ops.p_block.transpose() * ops.z) + ops.offset;
}

namespace {

// One batch: p samples x1 = A_0 x0 + B u0 + w, regressed for B with A_0 known.
// Returns the estimation error B_hat - B. Optionally reports tr((U^T U)^{-1}).
Mat batch_error(const Mat& b, double sigma_w, int p, Rng& rng, double* inv_gram_trace) {
  const Eigen::Index n = b.rows(), m = b.cols();
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat u(p, m), w(p, n);
  for (int i = 0; i < p; ++i) {
    for (Eigen::Index r = 0; r < m; ++r) u(i, r) = normal(rng);
    for (Eigen::Index r = 0; r < n; ++r) w(i, r) = sigma_w * normal(rng);
  }
  // With A_0 known the target x1 - A_0 x0 equals U B^T + W whatever x0 is, so x0
  // is not drawn and the error is ((U^T U)^{-1} U^T W)^T (exactly 0 at sigma = 0).
  const Mat gram = u.transpose() * u;
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) throw IdentifiabilityError("input design is rank deficient", -1);
  if (inv_gram_trace) *inv_gram_trace = llt.solve(Mat::Identity(m, m)).trace();
  return llt.solve(u.transpose() * w).transpose();
}

}  // namespace

Mat draw_b_estimate(const FoltiModel& model, double sigma_w, int p, int n_batches, Rng& rng) {
  Mat sum = Mat::Zero(model.state_dim(), model.input_dim());
  for (int i = 0; i < n_batches; ++i) sum += batch_error(model.b(), sigma_w, p, rng, nullptr);
  return model.b() + sum / n_batches;
}

TraceEstimate monte_carlo_trace_kb(const FoltiModel& model, double sigma_w, int p, int n_batches, int draws,
                                   std::uint64_t seed, int workers) {
  if (draws < 1) throw DomainError("draws must be at least 1");
  const int n = model.state_dim();
  const int m = model.input_dim();
  TraceEstimate est;
  est.closed = trace_kb_closed(n, m, sigma_w, n_batches, p);
  est.draws = draws;

  std::vector<double> err(draws), general(draws);
  parallel_for(draws, workers, [&](int d) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(d));
    Mat sum = Mat::Zero(n, m);
    double tr = 0.0;
    for (int i = 0; i < n_batches; ++i) {
      double inv_tr = 0.0;
      sum += batch_error(model.b(), sigma_w, p, rng, &inv_tr);
      // Per-batch sandwich trace is n sigma^2 tr((U^T U)^{-1}).
      tr += n * sigma_w * sigma_w * inv_tr;
    }
    err[d] = (sum / n_batches).squaredNorm();
    general[d] = tr / (static_cast<double>(n_batches) * n_batches);
  });

  double mean = 0.0, mean_general = 0.0;
  for (int d = 0; d < draws; ++d) {
    mean += err[d];
    mean_general += general[d];
  }
  mean /= draws;
  mean_general /= draws;
  double var = 0.0;
  for (double e : err) var += (e - mean) * (e - mean);
  est.mean = mean;
  est.mean_general = mean_general;
  est.std_error = draws > 1 ? std::sqrt(var / (draws - 1) / draws) : 0.0;
  return est;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("log-log fit needs distinct x values");
  return sxy / sxx;
}

ComplexityReport monte_carlo_gap(const BoundInputs& inputs, const std::vector<int>& n_values, int replicates,
                                 std::uint64_t seed, int workers) {
  inputs.validate();
  if (replicates < 1) throw ConfigError("replicates: must be at least 1");
  if (n_values.empty()) throw ConfigError("n_values: must not be empty");
  for (int nv : n_values) {
    if (nv < 1) throw ConfigError("n_values: every N must be at least 1");
  }

  const BoundOperators ops = assemble_operators(inputs);
  const int n = ops.state_dim, m = ops.input_dim;
  const Controller truth = controller(ops, ops.p_block);

  ComplexityReport report;
  report.optimal_cost = ops.offset + truth.pz.dot(truth.u);
  const LagrangeBound probe = bound_lagrange(ops, 0.0);
  report.lagrange_assumption_holds = probe.assumption_holds;
  report.lagrange_min_symmetric_eigenvalue = probe.min_symmetric_eigenvalue;
  report.lagrange_min_real_eigenvalue = probe.min_real_eigenvalue;

  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    const int nb = n_values[idx];
    std::vector<double> plug(replicates), roll(replicates);
    std::vector<std::string> errors(replicates);
    std::vector<char> ok(replicates, 0);

    parallel_for(replicates, workers, [&](int r) {
      try {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(idx) * replicates + r);
        Mat sum = Mat::Zero(n, m);
        for (int i = 0; i < nb; ++i) sum += batch_error(inputs.model.b(), inputs.sigma_w, inputs.p, rng, nullptr);
        const Mat b_hat = inputs.model.b() + sum / nb;
        const Controller est = controller(ops, expand_b(ops, b_hat));
        const double j_hat = ops.offset + est.pz.dot(est.u);
        plug[r] = std::abs(j_hat - report.optimal_cost);
        const Vec du = est.u - truth.u;
        roll[r] = std::abs(du.dot(truth.normal * du));
        ok[r] = 1;
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    });

    GapRow row;
    row.n_batches = nb;
    double sp = 0.0, sr = 0.0;
    for (int r = 0; r < replicates; ++r) {
      if (ok[r]) {
        ++row.replicates;
        sp += plug[r];
        sr += roll[r];
      } else {
        ++row.failures;
        report.failure_messages.push_back("N=" + std::to_string(nb) + " replicate " + std::to_string(r) + ": " +
                                          errors[r]);
      }
    }
    if (row.replicates > 0) {
      row.gap = sp / row.replicates;
      row.rollout_gap = sr / row.replicates;
      double vp = 0.0, vr = 0.0;
      for (int r = 0; r < replicates; ++r) {
        if (!ok[r]) continue;
        vp += (plug[r] - row.gap) * (plug[r] - row.gap);
        vr += (roll[r] - row.rollout_gap) * (roll[r] - row.rollout_gap);
      }
      if (row.replicates > 1) {
        row.gap_std_error = std::sqrt(vp / (row.replicates - 1) / row.replicates);
        row.rollout_std_error = std::sqrt(vr / (row.replicates - 1) / row.replicates);
      }
    }
    row.trace_kb = trace_kb_closed(n, m, inputs.sigma_w, nb, inputs.p);
    row.bound_ls = bound_least_squares(ops, row.trace_kb);
    if (probe.assumption_holds) row.bound_lagrange = bound_lagrange(ops, row.trace_kb).value;
    report.rows.push_back(std::move(row));
  }

  std::vector<double> xs, ys;
  bool positive = report.rows.size() >= 2;
  for (const auto& row : report.rows) {
    positive = positive && row.gap > 0.0;
    xs.push_back(row.n_batches);
    ys.push_back(row.gap);
  }
  if (positive) report.loglog_slope = loglog_slope(xs, ys);
  return report;
}

json report_to_json(const ComplexityReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"N", row.n_batches},
                    {"gap", row.gap},
                    {"std_error", row.gap_std_error},
                    {"rollout_gap", row.rollout_gap},
                    {"rollout_std_error", row.rollout_std_error},
                    {"bound_ls", row.bound_ls},
                    {"bound_lagrange", row.bound_lagrange ? json(*row.bound_lagrange) : json(nullptr)},
                    {"trace_kb", row.trace_kb},
                    {"replicates", row.replicates},
                    {"failures", row.failures}});
  }
  return {{"rows", std::move(rows)},
          {"optimal_cost", report.optimal_cost},
          {"loglog_slope", report.loglog_slope ? json(*report.loglog_slope) : json(nullptr)},
          {"lagrange_assumption",
           {{"holds", report.lagrange_assumption_holds},
            {"min_symmetric_eigenvalue", report.lagrange_min_symmetric_eigenvalue},
            {"min_real_eigenvalue", report.lagrange_min_real_eigenvalue}}},
          {"failure_messages", report.failure_messages}};
}

std::string report_to_csv(const ComplexityReport& report) {
  std::string out = "N,gap,std_error,bound_ls,bound_lagrange,trace_kb\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.n_batches) + "," + format_double(row.gap) + "," + format_double(row.gap_std_error) +
           "," + format_double(row.bound_ls) + "," +
           (row.bound_lagrange ? format_double(*row.bound_lagrange) : std::string()) + "," +
           format_double(row.trace_kb) + "\n";
  }
  return out;
}

}  // namespace folti
