#include "folti/dynamics.hpp"

#include "folti/error.hpp"

namespace folti {

std::string to_string(Convention c) {
  return c == Convention::kOrderSubtracted ? "order-subtracted" : "order-added";
}

Convention convention_from_string(const std::string& s) {
  if (s == "order-subtracted") return Convention::kOrderSubtracted;
  if (s == "order-added") return Convention::kOrderAdded;
  throw ConfigError("unknown convention '" + s + "' (expected order-subtracted|order-added)");
}

FoltiModel::FoltiModel(Mat a, Mat b, FracOrder alpha, Convention convention)
    : a_(std::move(a)), b_(std::move(b)), alpha_(std::move(alpha)), convention_(convention) {
  if (a_.rows() != a_.cols()) throw DimensionError("A must be square");
  if (a_.rows() != alpha_.size()) throw DimensionError("A and alpha dimensions differ");
  if (b_.rows() != a_.rows()) throw DimensionError("B row count must equal state dimension");
  if (b_.cols() == 0) throw DimensionError("B has no columns");
}

Mat FoltiModel::one_step_matrix() const {
  return convention_ == Convention::kOrderSubtracted ? Mat(a_ - alpha_.as_diagonal())
                                                     : Mat(a_ + alpha_.as_diagonal());
}

void Trajectory::validate(int n, int m) const {
  if (states.size() != inputs.size() + 1) {
    throw DimensionError("trajectory must hold exactly one more state than inputs");
  }
  for (const auto& x : states) {
    if (x.size() != n) throw DimensionError("state vector has wrong length");
  }
  for (const auto& u : inputs) {
    if (u.size() != m) throw DimensionError("input vector has wrong length");
  }
}

MatSeq a_j_sequence(const FoltiModel& model, int horizon) {
  if (horizon < 1) throw DomainError("a_j_sequence needs horizon >= 1");
  MatSeq seq;
  seq.reserve(horizon);
  seq.push_back(model.one_step_matrix());
  const GlCoeffTable table(model.alpha(), horizon);
  for (int j = 1; j < horizon; ++j) seq.push_back(-table.d_matrix(j + 1));
  return seq;
}

PropagatorSet propagators(const FoltiModel& model, int horizon) {
  if (horizon < 0) throw DomainError("propagator horizon must be non-negative");
  const int n = model.state_dim();
  PropagatorSet props;
  props.g.reserve(horizon + 1);
  props.g.push_back(Mat::Identity(n, n));
  if (horizon == 0) return props;

  props.a_seq = a_j_sequence(model, horizon);
  const GlCoeffTable table(model.alpha(), horizon);
  for (int k = 1; k <= horizon; ++k) {
    Mat gk = props.a_seq[0] * props.g[k - 1];
    // A_j (j >= 1) is diagonal, so each term is a row scaling.
    for (int j = 1; j < k; ++j) {
      gk.noalias() -= table.d_diagonal(j + 1).asDiagonal() * props.g[k - 1 - j];
    }
    props.g.push_back(std::move(gk));
  }
  return props;
}

Trajectory simulate(const FoltiModel& model, const Vec& x0, std::span<const Vec> inputs,
                    std::span<const Vec> noise, const SimulateOptions& options) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int horizon = static_cast<int>(inputs.size());
  if (x0.size() != n) throw DimensionError("x0 length differs from state dimension");
  if (!noise.empty() && static_cast<int>(noise.size()) != horizon) {
    throw DimensionError("noise sequence must have one vector per input");
  }
  if (options.memory_length && *options.memory_length < 0) {
    throw DomainError("memory length must be non-negative");
  }

  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.states.push_back(x0);
  traj.inputs.assign(inputs.begin(), inputs.end());

  const Mat a0 = model.one_step_matrix();
  const GlCoeffTable table(model.alpha(), horizon + 1);
  for (int k = 0; k < horizon; ++k) {
    const Vec& u = inputs[k];
    if (u.size() != m) throw DimensionError("input vector has wrong length");
    Vec next = a0 * traj.states[k] + model.b() * u;
    int deepest = k;
    if (options.memory_length) deepest = std::min(k, *options.memory_length);
    for (int j = 1; j <= deepest; ++j) {
      next -= table.d_diagonal(j + 1).cwiseProduct(traj.states[k - j]);
    }
    if (!noise.empty()) {
      if (noise[k].size() != n) throw DimensionError("noise vector has wrong length");
      next += noise[k];
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Vec closed_form_state(const PropagatorSet& props, const FoltiModel& model, const Vec& x0,
                      std::span<const Vec> inputs, int k) {
  if (k < 0 || k > props.horizon()) throw DomainError("step index outside propagator horizon");
  if (static_cast<int>(inputs.size()) < k) throw DimensionError("fewer inputs than steps");
  if (x0.size() != model.state_dim()) throw DimensionError("x0 length differs from state dimension");
  Vec x = props.g[k] * x0;
  for (int j = 0; j < k; ++j) {
    if (inputs[j].size() != model.input_dim()) throw DimensionError("input vector has wrong length");
    x.noalias() += props.g[k - 1 - j] * (model.b() * inputs[j]);
  }
  return x;
}

}  // namespace folti
