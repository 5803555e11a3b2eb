#pragma once

// Synthetic models, costs, noise and trajectory datasets.

#include <cstdint>
#include <string>
#include <vector>

#include "folti/dynamics.hpp"
#include "folti/lqr.hpp"
#include "folti/parallel.hpp"

namespace folti {

inline constexpr const char* kToolkitVersion = "0.3.0";
inline constexpr double kSpectralRadiusTarget = 0.95;
inline constexpr double kCostRidge = 1e-6;

enum class NoiseFamily { kGaussian, kCauchy, kGamma, kSincSquared, kUniform, kPoisson };
std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

/// Half-width of the sinc-squared sampling window, 8 pi.
double sinc_squared_truncation();
/// Standard deviation of the unit sinc-squared density truncated to the window.
double sinc_squared_unit_std();

enum class AlphaMode { kFixed, kSampledCommensurate };

struct GenSpec {
  int n = 2;
  int m = 2;
  int horizon = 64;
  int n_trajectories = 1;
  AlphaMode alpha_mode = AlphaMode::kSampledCommensurate;
  Vec alpha_fixed;  // used when alpha_mode == kFixed
  NoiseFamily noise_family = NoiseFamily::kGaussian;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
  Convention convention = Convention::kOrderSubtracted;
  bool store_noise = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// A uniform on [-1, 1] rescaled to spectral radius 0.95, B uniform on [-1, 1],
/// alpha fixed or a single value uniform on [0.1, 0.9].
FoltiModel random_model(const GenSpec& spec, Rng& rng);

/// Q = M^T M, R = M'^T M' + 1e-6 I, Q_f = M''^T M'' with M uniform on [-1, 1].
CostSpec random_cost(int n, int m, Rng& rng);

/// T vectors of length n, zero-mean with std `scale` (except Cauchy, whose
/// scale parameter is `scale` and which has no moments).
VecSeq sample_noise(NoiseFamily family, double scale, int horizon, int n, Rng& rng);

struct Dataset {
  GenSpec spec;
  FoltiModel model;
  std::vector<Trajectory> trajectories;
  std::vector<CostSpec> costs;
  std::vector<VecSeq> optimal_controls;
  std::vector<double> optimal_costs;
  std::vector<VecSeq> noise;  // empty unless spec.store_noise
  std::string toolkit_version = kToolkitVersion;
};

/// x0 standard normal, inputs uniform on [-1, 1], states simulated with the
/// sampled noise, optimal controls by least-squares LQR on the noise-free model.
/// Trajectory i draws from stream (seed, i + 1); the model from (seed, 0).
Dataset generate(const GenSpec& spec, int workers = 1);

}  // namespace folti
