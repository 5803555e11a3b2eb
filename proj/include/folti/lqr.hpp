#pragma once

// Finite-horizon LQR for FOLTI systems: stacked least squares, the
// Lagrange-multiplier block-Toeplitz system, and a Riccati oracle for the
// integer-order case.

#include <string>

#include "folti/dynamics.hpp"
#include "folti/toeplitz.hpp"
#include "folti/types.hpp"

namespace folti {

/// LQR weights. Q and Q_f symmetric PSD, R symmetric positive definite.
class CostSpec {
 public:
  CostSpec(Mat q, Mat r, Mat q_f);
  /// Q_f = Q.
  CostSpec(Mat q, Mat r);

  const Mat& q() const { return q_; }
  const Mat& r() const { return r_; }
  const Mat& q_f() const { return q_f_; }
  int state_dim() const { return static_cast<int>(q_.rows()); }
  int input_dim() const { return static_cast<int>(r_.rows()); }
  bool terminal_equals_stage() const { return q_f_ == q_; }

  CostSpec scaled(double factor) const { return {factor * q_, factor * r_, factor * q_f_}; }

 private:
  Mat q_, r_, q_f_;
};

enum class ControlMethod { kLeastSquares, kLagrange, kRiccatiOracle };
std::string to_string(ControlMethod m);

struct ControlSolution {
  VecSeq u;  // u_0..u_{T-1}
  double cost = 0.0;
  ControlMethod method = ControlMethod::kLeastSquares;
};

/// X = g_big U + h_big x0 over the stacked horizon.
struct StackedSystem {
  int horizon = 0;
  int state_dim = 0;
  int input_dim = 0;
  Mat g_big;  // (T+1)n x Tm, block (k, j) = G_{k-1-j} B
  Mat h_big;  // (T+1)n x n, blocks I, G_1..G_T
  Mat q_bar;  // diag(Q, ..., Q, Q_f)
  Mat r_bar;  // diag(R, ..., R)
  Mat g_d;    // (T+1)n x Tn, g_big without the B factor
};

StackedSystem build_stacked(const FoltiModel& model, const PropagatorSet& props,
                            const CostSpec& cost, int horizon);

/// Minimizes X^T Qbar X + U^T Rbar U, i.e. solves (G^T Qbar G + Rbar) U = -G^T Qbar H x0.
/// The normal matrix is factorized through a Householder QR of the square-root
/// system [Qbar^{1/2} G; Rbar^{1/2}] rather than formed explicitly.
ControlSolution solve_least_squares(const StackedSystem& sys, const Vec& x0);

/// lambda = G_lambda lambda + 2 H_lambda x0, lambda = [lambda_1; ...; lambda_T].
struct LagrangeSystem {
  int horizon = 0;
  int state_dim = 0;
  Mat g_lambda;        // Tn x Tn
  Mat h_lambda;        // Tn x n
  StructuredOperator system;  // I - G_lambda
  Mat r_inv_bt;        // R^{-1} B^T
  CostSpec cost;
};

/// Row k (1-based) of G_lambda holds -Q_k G_{k-i} B R^{-1} B^T for i <= k and
/// A_{i-k-1}^T for i > k, where Q_k = Q except Q_T = Q_f. H_lambda block k is Q_k G_k.
LagrangeSystem build_lagrange(const FoltiModel& model, const PropagatorSet& props,
                              const CostSpec& cost, int horizon);

/// Solves (I - G_lambda) lambda = 2 H_lambda x0 and sets u_k = -1/2 R^{-1} B^T lambda_{k+1}.
/// The cost is evaluated by simulating the model under the returned inputs.
ControlSolution solve_lagrange(const LagrangeSystem& lsys, const FoltiModel& model, const Vec& x0,
                               const SolveOptions& options = {});

/// J_T = sum_{k<T} (x_k^T Q x_k + u_k^T R u_k) + x_T^T Q_f x_T.
double eval_cost(const Trajectory& traj, const CostSpec& cost);

/// Backward Riccati recursion for x_{k+1} = a_eff x_k + B u_k, unrolled from x0
/// into an open-loop input sequence.
ControlSolution riccati_oracle(const Mat& a_eff, const Mat& b, const CostSpec& cost, int horizon,
                               const Vec& x0);

/// Builds propagators and runs the requested solver. kRiccatiOracle uses the
/// one-step matrix only and ignores the memory terms, so it is exact at alpha = 1.
ControlSolution solve_control(const FoltiModel& model, const CostSpec& cost, const Vec& x0,
                              int horizon, ControlMethod method, const SolveOptions& options = {});

}  // namespace folti
