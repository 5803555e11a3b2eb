#pragma once

// Held-out multi-step prediction: identified FOLTI model vs a plain LTI fit.

#include <vector>

#include "folti/dynamics.hpp"
#include "folti/sysid.hpp"

namespace folti {

struct BaselineOptions {
  /// Trajectories [0, n_train) are used for fitting, the rest are held out.
  int n_train = 0;
  /// Fit the LTI model on every transition of the training trajectories rather
  /// than only on the first transitions shared with the FOLTI estimator.
  bool lti_all_transitions = false;
};

struct BaselineReport {
  IdentifiedParams folti;
  FoltiModel folti_model;
  bool alpha_clamped = false;
  LtiFit lti;
  int n_train = 0;
  int n_test = 0;
  double folti_mse = 0.0;  // mean over held-out trajectories, steps 1..T, and components
  double lti_mse = 0.0;
  double ratio = 0.0;      // folti_mse / lti_mse
};

/// x_{k+1} = A x_k + B u_k from x0 under the recorded inputs.
VecSeq lti_rollout(const LtiFit& fit, const Vec& x0, std::span<const Vec> inputs);

/// Mean squared error of predicted states 1..T against the recorded ones.
double prediction_mse(const VecSeq& predicted, const VecSeq& actual);

BaselineReport compare_baseline(const std::vector<Trajectory>& trajectories, const Vec& known_diag_a,
                                Convention convention, const BaselineOptions& options);

}  // namespace folti
