#include "folti/baseline.hpp"

#include <cmath>

#include "folti/error.hpp"

namespace folti {

VecSeq lti_rollout(const LtiFit& fit, const Vec& x0, std::span<const Vec> inputs) {
  VecSeq x;
  x.reserve(inputs.size() + 1);
  x.push_back(x0);
  for (const Vec& u : inputs) x.push_back(fit.a * x.back() + fit.b * u);
  return x;
}

double prediction_mse(const VecSeq& predicted, const VecSeq& actual) {
  if (predicted.size() != actual.size()) throw DimensionError("prediction length differs from trajectory length");
  double sum = 0.0;
  long count = 0;
  for (std::size_t k = 1; k < actual.size(); ++k) {
    sum += (predicted[k] - actual[k]).squaredNorm();
    count += actual[k].size();
  }
  return count > 0 ? sum / count : 0.0;
}

BaselineReport compare_baseline(const std::vector<Trajectory>& trajectories, const Vec& known_diag_a,
                                Convention convention, const BaselineOptions& options) {
  const int total = static_cast<int>(trajectories.size());
  if (total == 0) throw ConfigError("dataset: no trajectories");
  if (options.n_train < 1 || options.n_train >= total) {
    throw ConfigError("baseline.n_train: must be in [1, " + std::to_string(total - 1) + "]");
  }

  const std::vector<Trajectory> train(trajectories.begin(), trajectories.begin() + options.n_train);
  const auto first = first_transitions(train);

  RegressionData data{first, known_diag_a};
  BaselineReport rep{estimate(data, convention), FoltiModel(Mat::Zero(1, 1), Mat::Zero(1, 1), FracOrder{1.0}),
                     false, {}, options.n_train, total - options.n_train};
  rep.folti_model = model_from_estimate(rep.folti, known_diag_a, convention, &rep.alpha_clamped);

  if (options.lti_all_transitions) {
    std::vector<TransitionSample> all;
    for (const auto& t : train) {
      for (int k = 0; k < t.horizon(); ++k) all.push_back({t.states[k], t.inputs[k], t.states[k + 1]});
    }
    rep.lti = fit_lti(all);
  } else {
    rep.lti = fit_lti(first);
  }

  double folti_sum = 0.0, lti_sum = 0.0;
  for (int i = options.n_train; i < total; ++i) {
    const Trajectory& t = trajectories[i];
    const Trajectory pred = simulate(rep.folti_model, t.states[0], t.inputs);
    folti_sum += prediction_mse(pred.states, t.states);
    lti_sum += prediction_mse(lti_rollout(rep.lti, t.states[0], t.inputs), t.states);
  }
  rep.folti_mse = folti_sum / rep.n_test;
  rep.lti_mse = lti_sum / rep.n_test;
  rep.ratio = rep.lti_mse > 0.0 ? rep.folti_mse / rep.lti_mse : (rep.folti_mse > 0.0 ? INFINITY : 1.0);
  return rep;
}

}  // namespace folti
