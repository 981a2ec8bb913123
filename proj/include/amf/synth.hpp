#pragma once

#include "amf/field.hpp"
#include "amf/likelihood.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace amf {

struct MaternConfig {
  int size = 32;            // grid side
  int order_p = 1;          // smoothness nu = p + 1/2
  double length_l = 3.0;
  double noise_sigma = 0.3;
  std::uint64_t seed = 0;
};

/// Matern kernel with smoothness nu = p + 1/2 in closed form; unit marginal
/// variance, monotone decreasing in d.
double matern_covariance(double d, double l, int p);

/// Dense-Cholesky sampler for a stationary zero-mean Gaussian field with
/// Matern covariance over Euclidean pixel distances. The factorization
/// depends only on (size, l, p) and is reused across draws.
class MaternGpSampler {
 public:
  MaternGpSampler(int size, double length_l, int order_p);

  ScalarField sample(std::uint64_t seed) const;
  int size() const { return size_; }

 private:
  int size_;
  std::vector<double> chol_;  // lower-triangular factor, row-major
};

/// One-shot draw; size <= 64 enforced for the dense method.
ScalarField sample_gp_field(const MaternConfig& cfg);

/// z_i = 1 iff f_i exceeds the empirical quantile of f.
LabelField make_ground_truth(const ScalarField& f, double quantile);

/// y = z + iid N(0, sigma^2); deterministic given seed.
ScalarField add_gaussian_noise(const LabelField& z, double sigma, std::uint64_t seed);

struct AmbiguousCircle {
  ScalarField clean;
  ScalarField noisy;
  LabelField truth;
  MixtureModel fg;
  MixtureModel bg;
};

/// Centered circle of diameter size/2 on a flat background: background
/// intensity 30 (noise sigma 5), upper half-circle 50 (sigma 10), lower
/// half-circle 70 (sigma 5). The returned class-conditional mixtures share
/// the ambiguous middle component.
AmbiguousCircle synth_ambiguous_circle(int size, std::uint64_t seed);

/// Deterministic standard-normal stream (Box-Muller over mt19937_64); avoids
/// the implementation-defined std::normal_distribution.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}
  double next();
  double uniform();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace amf
