#pragma once

// Sample-complexity bounds for LQR with an estimated input matrix, and the
// Monte-Carlo experiment that checks them.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "folti/dynamics.hpp"
#include "folti/lqr.hpp"
#include "folti/parallel.hpp"

namespace folti {

struct BoundInputs {
  FoltiModel model;  // true model; A and alpha are treated as known
  CostSpec cost;
  Vec x0;
  int horizon = 1;
  double sigma_w = 0.0;
  int p = 0;          // samples per batch
  int n_batches = 1;  // N

  /// Throws ConfigError on inconsistent dimensions or p <= m + 1.
  void validate() const;
};

/// Operators shared by both bounds.
struct BoundOperators {
  int state_dim = 0;
  int input_dim = 0;
  int horizon = 0;
  Vec z;          // G_d^T Qbar H x0
  Mat s;          // G_d^T Qbar G_d
  Mat p_block;    // blkdiag(B, ..., B), Tn x Tm
  Mat r_bar;      // blkdiag(R, ..., R)
  double offset = 0.0;  // x0^T H^T Qbar H x0
  Mat l_qg;       // block (r, c) = Q_r G_{r-c} for c <= r
  Mat l_u;        // block (r, c) = A_{c-r-1}^T for c > r
  Vec h_lambda_x0;
  double norm_b = 0.0;
  double norm_r_inv = 0.0;
};

BoundOperators assemble_operators(const BoundInputs& inputs);

/// n m sigma^2 / (N (p - m - 1)). DomainError when p <= m + 1 or N < 1.
double trace_kb_closed(int n, int m, double sigma_w, int n_batches, int p);

/// Tr[(1/N) (phi^T phi)^{-1} phi^T (I_p kron K_w) phi (phi^T phi)^{-1}] with phi the
/// pn x nm input block. IdentifiabilityError when phi^T phi is singular.
double trace_kb_general(const Mat& phi, const Mat& noise_cov, int n_batches);

/// ||z||^2 ||R^{-1}|| (1 + ||B||^2 ||R^{-1}|| ||S||) (tr + 2 ||B|| sqrt(tr)).
double bound_least_squares(const BoundOperators& ops, double trace_kb);
double bound_least_squares(const BoundInputs& inputs, double trace_kb);

struct LagrangeBound {
  std::optional<double> value;  // empty when the PSD assumption fails
  bool assumption_holds = false;
  double min_symmetric_eigenvalue = 0.0;  // of the symmetric part of L_QG^{-1}(I - L_u)
  double min_real_eigenvalue = 0.0;       // of L_QG^{-1}(I - L_u) itself
};

/// ||z|| ||H_lambda x0|| ||R^{-1}|| ||LL|| (1 + ||B||^2 ||R^{-1}|| ||LL|| ||L_QG||)
/// (tr + 2 ||B|| sqrt(tr)) with ||LL|| = ||L_QG^{-1}|| ||L_QG||, evaluated only when
/// the symmetric part of L_QG^{-1}(I - L_u) is PSD. SolverError for singular L_QG.
/// Since G = (I - L)^{-1} for the strictly lower lag operator L and I - L_u = (I - L)^T,
/// L_QG^{-1}(I - L_u) = (I - L) Qbar^{-1} (I - L)^T: assembled from a cost with Q, Q_f
/// positive definite the check always passes, and it can only fail on hand-built operators.
LagrangeBound bound_lagrange(const BoundOperators& ops, double trace_kb);
LagrangeBound bound_lagrange(const BoundInputs& inputs, double trace_kb);

/// Optimal cost as a function of the input matrix: offset - z^T P (P^T S P + Rbar)^{-1} P^T z.
double plug_in_cost(const BoundOperators& ops, const Mat& b);
/// Cost on the true system of the open-loop inputs computed from `b_hat`.
double rollout_cost(const BoundOperators& ops, const Mat& b_hat);

/// Mean of B_hat averaged over N batches of p Gaussian designs: one draw of the
/// estimator used by the Monte-Carlo experiment.
Mat draw_b_estimate(const FoltiModel& model, double sigma_w, int p, int n_batches, Rng& rng);

struct TraceEstimate {
  double mean = 0.0;  // mean ||B_hat - B||_F^2 over draws
  double std_error = 0.0;
  double mean_general = 0.0;  // mean of trace_kb_general over the same designs
  double closed = 0.0;
  int draws = 0;
};

/// Monte-Carlo trace of the B-estimator covariance over fresh designs.
TraceEstimate monte_carlo_trace_kb(const FoltiModel& model, double sigma_w, int p, int n_batches,
                                   int draws, std::uint64_t seed, int workers = 1);

struct GapRow {
  int n_batches = 0;
  double gap = 0.0;  // mean plug-in |J_hat - J|
  double gap_std_error = 0.0;
  double rollout_gap = 0.0;  // mean |J_true(U_hat) - J|
  double rollout_std_error = 0.0;
  double bound_ls = 0.0;
  std::optional<double> bound_lagrange;
  double trace_kb = 0.0;
  int failures = 0;
  int replicates = 0;  // successful replicates
};

struct ComplexityReport {
  std::vector<GapRow> rows;
  double optimal_cost = 0.0;
  bool lagrange_assumption_holds = false;
  double lagrange_min_symmetric_eigenvalue = 0.0;
  double lagrange_min_real_eigenvalue = 0.0;
  std::optional<double> loglog_slope;  // empty when any gap is not positive
  std::vector<std::string> failure_messages;
};

/// For each N, `replicates` independent estimates of B from N batches of p
/// samples; replicate r at index i of n_values uses stream (seed, i * replicates + r).
/// Failed replicates are dropped and counted.
ComplexityReport monte_carlo_gap(const BoundInputs& inputs, const std::vector<int>& n_values, int replicates,
                                 std::uint64_t seed, int workers = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json report_to_json(const ComplexityReport& report);
/// Long format: N,gap,std_error,bound_ls,bound_lagrange,trace_kb.
std::string report_to_csv(const ComplexityReport& report);

}  // namespace folti
