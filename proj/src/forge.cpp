#include "folti/forge.hpp"

#include <cmath>
#include <numbers>

#include "folti/error.hpp"
#include "folti/linalg.hpp"

namespace folti {

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kCauchy: return "cauchy";
    case NoiseFamily::kGamma: return "gamma";
    case NoiseFamily::kSincSquared: return "sinc_squared";
    case NoiseFamily::kUniform: return "uniform";
    case NoiseFamily::kPoisson: return "poisson";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& s) {
  for (auto f : {NoiseFamily::kGaussian, NoiseFamily::kCauchy, NoiseFamily::kGamma,
                 NoiseFamily::kSincSquared, NoiseFamily::kUniform, NoiseFamily::kPoisson}) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("unknown noise family '" + s +
                    "' (expected gaussian|cauchy|gamma|sinc_squared|uniform|poisson)");
}

double sinc_squared_truncation() { return 8.0 * std::numbers::pi; }

double sinc_squared_unit_std() {
  // On [-L, L] with L a multiple of pi: int sin^2 = L and int sinc^2 = 2 Si(2L).
  static const double value = [] {
    const double upper = 2.0 * sinc_squared_truncation();
    const int intervals = 200000;
    const double h = upper / intervals;
    auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
    double s = f(0.0) + f(upper);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    const double si = s * h / 3.0;
    return std::sqrt(sinc_squared_truncation() / (2.0 * si));
  }();
  return value;
}

void GenSpec::validate() const {
  if (n < 1) throw ConfigError("gen.n: state dimension must be positive");
  if (m < 1) throw ConfigError("gen.m: input dimension must be positive");
  if (horizon < 1) throw ConfigError("gen.T: horizon must be positive");
  if (n_trajectories < 0) throw ConfigError("gen.traj: trajectory count must be non-negative");
  if (!(noise_scale >= 0.0)) throw ConfigError("gen.sigma: noise scale must be non-negative");
  if (alpha_mode == AlphaMode::kFixed) {
    if (alpha_fixed.size() != n) throw ConfigError("gen.alpha: fixed order needs n components");
    try {
      FracOrder check(alpha_fixed);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("gen.alpha: ") + e.what());
    }
  }
}

namespace {

Mat uniform_matrix(int rows, int cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat out(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = dist(rng);
  return out;
}

}  // namespace

FoltiModel random_model(const GenSpec& spec, Rng& rng) {
  Mat a = uniform_matrix(spec.n, spec.n, rng);
  const double rho = spectral_radius(a);
  if (rho > 0.0) a *= kSpectralRadiusTarget / rho;
  Mat b = uniform_matrix(spec.n, spec.m, rng);
  Vec alpha;
  if (spec.alpha_mode == AlphaMode::kFixed) {
    alpha = spec.alpha_fixed;
  } else {
    std::uniform_real_distribution<double> dist(0.1, 0.9);
    alpha = Vec::Constant(spec.n, dist(rng));
  }
  return {std::move(a), std::move(b), FracOrder(std::move(alpha)), spec.convention};
}

CostSpec random_cost(int n, int m, Rng& rng) {
  const Mat mq = uniform_matrix(n, n, rng);
  const Mat mr = uniform_matrix(m, m, rng);
  const Mat mf = uniform_matrix(n, n, rng);
  return {mq.transpose() * mq, mr.transpose() * mr + kCostRidge * Mat::Identity(m, m),
          mf.transpose() * mf};
}

VecSeq sample_noise(NoiseFamily family, double scale, int horizon, int n, Rng& rng) {
  if (!(scale >= 0.0)) throw DomainError("noise scale must be non-negative");
  VecSeq out(horizon, Vec::Zero(n));
  if (scale == 0.0) return out;

  auto fill = [&](auto&& draw) {
    for (auto& w : out)
      for (int i = 0; i < n; ++i) w[i] = draw();
  };
  switch (family) {
    case NoiseFamily::kGaussian: {
      std::normal_distribution<double> d(0.0, scale);
      fill([&] { return d(rng); });
      break;
    }
    case NoiseFamily::kUniform: {
      const double half = std::sqrt(3.0) * scale;
      std::uniform_real_distribution<double> d(-half, half);
      fill([&] { return d(rng); });
      break;
    }
    case NoiseFamily::kGamma: {
      // shape 2, scale sigma / sqrt(2): mean sigma sqrt(2), std sigma.
      const double theta = scale / std::sqrt(2.0);
      std::gamma_distribution<double> d(2.0, theta);
      fill([&] { return d(rng) - 2.0 * theta; });
      break;
    }
    case NoiseFamily::kPoisson: {
      std::poisson_distribution<int> d(1.0);
      fill([&] { return (d(rng) - 1.0) * scale; });
      break;
    }
    case NoiseFamily::kCauchy: {
      std::cauchy_distribution<double> d(0.0, scale);
      fill([&] { return d(rng); });
      break;
    }
    case NoiseFamily::kSincSquared: {
      // Rejection from a uniform proposal; the density is symmetric, so zero-mean.
      const double half = sinc_squared_truncation();
      const double unit = scale / sinc_squared_unit_std();
      std::uniform_real_distribution<double> prop(-half, half);
      std::uniform_real_distribution<double> accept(0.0, 1.0);
      fill([&] {
        while (true) {
          const double x = prop(rng);
          const double s = x == 0.0 ? 1.0 : std::sin(x) / x;
          if (accept(rng) < s * s) return x * unit;
        }
      });
      break;
    }
  }
  return out;
}

Dataset generate(const GenSpec& spec, int workers) {
  spec.validate();
  Rng model_rng = make_stream(spec.seed, 0);
  Dataset ds{spec, random_model(spec, model_rng), {}, {}, {}, {}, {}};
  const int count = spec.n_trajectories;
  if (count == 0) return ds;

  const PropagatorSet props = propagators(ds.model, spec.horizon);
  const CostSpec placeholder(Mat::Zero(spec.n, spec.n), Mat::Identity(spec.m, spec.m));
  ds.trajectories.resize(count);
  ds.costs.assign(count, placeholder);
  ds.optimal_controls.resize(count);
  ds.optimal_costs.resize(count);
  std::vector<VecSeq> noise(count);

  std::vector<std::exception_ptr> errors(count);
  parallel_for(count, workers, [&](int i) {
    try {
      Rng rng = make_stream(spec.seed, static_cast<std::uint64_t>(i) + 1);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vec x0(spec.n);
      for (int r = 0; r < spec.n; ++r) x0[r] = normal(rng);
      VecSeq inputs;
      inputs.reserve(spec.horizon);
      for (int k = 0; k < spec.horizon; ++k) inputs.push_back(uniform_matrix(spec.m, 1, rng));
      noise[i] = sample_noise(spec.noise_family, spec.noise_scale, spec.horizon, spec.n, rng);
      ds.costs[i] = random_cost(spec.n, spec.m, rng);

      ds.trajectories[i] = simulate(ds.model, x0, inputs, noise[i]);
      const ControlSolution sol =
          solve_least_squares(build_stacked(ds.model, props, ds.costs[i], spec.horizon), x0);
      ds.optimal_controls[i] = sol.u;
      ds.optimal_costs[i] = sol.cost;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (spec.store_noise) ds.noise = std::move(noise);
  return ds;
}

}  // namespace folti
