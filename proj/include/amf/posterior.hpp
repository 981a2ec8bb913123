#pragma once

#include "amf/field.hpp"
#include "amf/likelihood.hpp"

#include <cstdint>
#include <vector>

namespace amf {

struct GibbsConfig {
  int chains = 5;
  int sweeps_per_chain = 1000;
  double temperature = 1.0;
  int thin = 10;     // keep every thin-th sweep after burn_in
  int burn_in = 0;   // sweeps discarded per chain
  std::uint64_t seed = 0;
  TvMode mode = TvMode::Anisotropic;
  int threads = 0;   // 0 = sequential; chains are independent given the seed

  void validate() const;
};

struct GibbsParticle {
  int chain_id = 0;
  int sweep_index = 0;
  LabelField labels;
};

struct SampleSet {
  int width = 0;
  int height = 0;
  int chains = 0;
  TvMode mode = TvMode::Anisotropic;
  std::vector<GibbsParticle> particles;
  // per chain, one entry per retained sweep
  std::vector<std::vector<double>> area_traces;
  std::vector<std::vector<double>> energy_traces;
};

struct AreaMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// ln P(z|y) up to the additive constant: sum_i z_i psi_i - lambda * L(z).
double log_posterior_unnorm(const LabelField& z, const ScalarField& psi, double lambda,
                            TvMode mode);

/// ln Q(z; theta) = sum_i z_i ln theta_i + (1-z_i) ln(1-theta_i), with theta
/// clamped to [1e-5, 1-1e-5] before the logs.
double log_q(const LabelField& z, const ProbabilityField& theta);

/// Single-site Gibbs sampler on the binary label posterior. Each chain starts
/// from an iid fair-coin labeling and performs raster-order sweeps; the
/// conditional for z_i = 1 is exp(-e1/T) / (exp(-e1/T) + exp(-e0/T)) computed
/// from the pixel's incident boundary terms. Deterministic given cfg.seed.
SampleSet gibbs_sample(const ScalarField& psi, double lambda, const GibbsConfig& cfg);

/// Potential scale reduction R-hat over per-chain scalar traces. Degenerate
/// (zero within-chain variance) traces give 1.
double gelman_rubin(const std::vector<std::vector<double>>& traces);

/// Pearson correlation between the particle masses under P and Q. Each log
/// sequence is shifted by its max before exponentiation; the unknown
/// normalizers only rescale the sequences and leave the correlation unchanged.
double compare_correlation(const SampleSet& samples, const ScalarField& psi, double lambda,
                           const ProbabilityField& theta, TvMode mode);

/// Closed-form foreground-area moments under Q: (sum theta, sum theta(1-theta)).
AreaMoments q_area_moments(const ProbabilityField& theta);

/// Empirical foreground-area moments across retained particles.
AreaMoments sample_area_moments(const SampleSet& samples);

/// D = [ln P(z|y) - ln P(z0|y)] - [ln Q(z;theta) - ln Q(z0;theta)], evaluated
/// through psi, the boundary lengths, and phi = logit(theta).
double log_ratio_gap(const LabelField& z, const LabelField& z0, const ScalarField& psi,
                     double lambda, const ProbabilityField& theta, TvMode mode);

struct PosteriorMap {
  LabelField argmax;
  double best = 0.0;
  double runner_up = 0.0;  // best value over labelings differing from argmax
};

/// Exhaustive maximization of log_posterior_unnorm; grids up to 20 pixels.
PosteriorMap enumerate_posterior_map(const ScalarField& psi, double lambda, TvMode mode);

/// True when the brute-force posterior MAP equals the MAP of the mean-field
/// solution at the same lambda and mode.
bool map_agreement(const ScalarField& psi, double lambda, TvMode mode);

}  // namespace amf
