#pragma once

// Discrete-time fractional-order LTI dynamics: recursive simulation and the
// propagator (closed-form) solution.

#include <optional>
#include <span>
#include <string>

#include "folti/gl.hpp"
#include "folti/types.hpp"

namespace folti {

/// Sign with which diag(alpha) enters the one-step matrix A_0.
///
/// kOrderSubtracted: A_0 = A - diag(alpha) (propagator form; the default used by
/// every solver). kOrderAdded: A_0 = A + diag(alpha), the form obtained by
/// expanding Delta^alpha x_{k+1} = A x_k + B u_k term by term. For j >= 1 both
/// use A_j = -D(alpha, j + 1).
enum class Convention { kOrderSubtracted, kOrderAdded };

std::string to_string(Convention c);
Convention convention_from_string(const std::string& s);

class FoltiModel {
 public:
  FoltiModel(Mat a, Mat b, FracOrder alpha,
             Convention convention = Convention::kOrderSubtracted);

  const Mat& a() const { return a_; }
  const Mat& b() const { return b_; }
  const FracOrder& alpha() const { return alpha_; }
  Convention convention() const { return convention_; }
  int state_dim() const { return static_cast<int>(a_.rows()); }
  int input_dim() const { return static_cast<int>(b_.cols()); }

  /// A_0, the matrix multiplying x_k in the update of x_{k+1}.
  Mat one_step_matrix() const;

  FoltiModel with_b(Mat b) const { return {a_, std::move(b), alpha_, convention_}; }

 private:
  Mat a_;
  Mat b_;
  FracOrder alpha_;
  Convention convention_;
};

struct Trajectory {
  VecSeq states;  // x_0..x_T
  VecSeq inputs;  // u_0..u_{T-1}

  int horizon() const { return static_cast<int>(inputs.size()); }
  /// Throws DimensionError unless states.size() == inputs.size() + 1 and all
  /// vectors have the given lengths.
  void validate(int n, int m) const;
};

/// G_0..G_T and the lag matrices A_0..A_{T-1} they are built from.
struct PropagatorSet {
  MatSeq g;
  MatSeq a_seq;

  int horizon() const { return static_cast<int>(g.size()) - 1; }
};

/// A_0 = A -/+ diag(alpha) (per convention), A_j = -D(alpha, j + 1) for 1 <= j <= T-1.
MatSeq a_j_sequence(const FoltiModel& model, int horizon);

/// G_0 = I, G_k = sum_{j=0}^{k-1} A_j G_{k-1-j}. O(T^2 n^3).
PropagatorSet propagators(const FoltiModel& model, int horizon);

struct SimulateOptions {
  /// Keep only the last `memory_length` lags of the memory sum. Unset = full history.
  std::optional<int> memory_length;
};

/// x_{k+1} = sum_{j=0}^{k} A_j x_{k-j} + B u_k + w_k with the full state history.
Trajectory simulate(const FoltiModel& model, const Vec& x0, std::span<const Vec> inputs,
                    std::span<const Vec> noise = {}, const SimulateOptions& options = {});

/// x_k = G_k x_0 + sum_{j=0}^{k-1} G_{k-1-j} B u_j.
Vec closed_form_state(const PropagatorSet& props, const FoltiModel& model, const Vec& x0,
                      std::span<const Vec> inputs, int k);

}  // namespace folti
