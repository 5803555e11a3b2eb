#pragma once

// One-step least-squares identification of the coupled matrix A_0 and B.

#include <optional>
#include <vector>

#include "folti/dynamics.hpp"
#include "folti/types.hpp"

namespace folti {

struct TransitionSample {
  Vec x0;
  Vec u0;
  Vec x1;
};

struct RegressionData {
  std::vector<TransitionSample> samples;
  Vec known_diag_a;  // diagonal of A, required to separate alpha from A_0
};

/// X = xi theta, theta = [rows of A_0, rows of B] stacked row-major.
struct RegressionDesign {
  Mat xi;      // pn x (n^2 + nm), xi = [pi, phi]
  Vec target;  // pn
  int state_dim = 0;
  int input_dim = 0;
  /// p n < n^2 + n m: the solve will report an identifiability error.
  bool underdetermined = false;
};

RegressionDesign build_regression(const RegressionData& data);

struct IdentifiedParams {
  Mat a_alpha_hat;  // estimate of A_0 (A - diag(alpha) or A + diag(alpha) per convention)
  Mat b_hat;
  Vec alpha_hat;
  double residual_norm = 0.0;
  std::optional<Mat> theta_cov;
};

/// Least squares through a column-pivoting QR of xi. alpha_hat is read off the
/// diagonal of A_0 given the known diag(A), with the sign fixed by `convention`;
/// nothing is clamped. When `noise_cov` (per-sample K_w) is given, theta_cov is
/// filled for a single repetition. Throws IdentifiabilityError on rank deficiency.
IdentifiedParams estimate(const RegressionData& data,
                          Convention convention = Convention::kOrderSubtracted,
                          const std::optional<Mat>& noise_cov = std::nullopt);

/// (1/N) (xi^T xi)^{-1} xi^T (I_p kron K_w) xi (xi^T xi)^{-1}.
Mat theta_covariance(const Mat& xi, const Mat& noise_cov, int n_repeats);

/// Rebuilds the model implied by an identification, with alpha clamped into
/// (0, 1] so the model is valid. A is chosen so that the model's one-step matrix
/// equals a_alpha_hat; without clamping diag(A) reproduces known_diag_a.
/// `clamped` reports whether clamping changed any component.
FoltiModel model_from_estimate(const IdentifiedParams& params, const Vec& known_diag_a,
                               Convention convention, bool* clamped = nullptr);

/// B only, with A_0 known: regress x1 - A_0 x0 on u0. Uses the compact form
/// B^T = (U^T U)^{-1} U^T Y, which equals the block-diagonal phi regression.
Mat estimate_input_matrix(const std::vector<TransitionSample>& samples, const Mat& a0);

/// phi block of xi for the given samples (pn x nm).
Mat input_design(const std::vector<TransitionSample>& samples, int state_dim);

/// First transitions (x_0, u_0, x_1) of each trajectory.
std::vector<TransitionSample> first_transitions(const std::vector<Trajectory>& trajectories);

/// Ordinary least-squares LTI fit x_{k+1} = A x_k + B u_k over the given samples.
struct LtiFit {
  Mat a;
  Mat b;
};
LtiFit fit_lti(const std::vector<TransitionSample>& samples);

}  // namespace folti
