#pragma once

#include "amf/field.hpp"
#include "amf/likelihood.hpp"
#include "amf/rof.hpp"

namespace amf {

struct AmfParams {
  double lambda = 1.0;  // boundary-length prior weight (pixel area fixed to 1)
  RofParams rof;
};

enum class Estimator { GaussianMoments, Kde };

struct AlternatingConfig {
  int max_outer = 20;
  double tol = 1e-3;  // fraction of MAP pixels allowed to change at convergence
  Estimator estimator = Estimator::GaussianMoments;
};

struct AmfResult {
  ProbabilityField theta;
  ScalarField phi;  // logit parameter field, phi = psi - lambda * div(dual)
  RofResult rof;
};

/// theta = sigmoid(rof_solve(psi, lambda).u); lambda = 0 reduces to the
/// pixelwise sigmoid of psi.
AmfResult amf_solve_detail(const ScalarField& psi, const AmfParams& params);
ProbabilityField amf_solve(const ScalarField& psi, const AmfParams& params);

/// E(theta) = sum[-theta*psi + theta ln theta + (1-theta) ln(1-theta)]
///          + lambda * TV(theta), with 0 ln 0 = 0.
double amf_energy(const ProbabilityField& theta, const ScalarField& psi,
                  const AmfParams& params);

/// z_i = 1 iff theta_i > threshold (ties to background).
LabelField map_labels(const ProbabilityField& theta, double threshold = 0.5);

/// Superlevel set of the logit field; nu = 0 recovers map_labels at 0.5.
LabelField level_set_labels(const ScalarField& phi, double nu);

struct ChanVeseResult {
  LabelField labels;
  ProbabilityField theta;
};

ChanVeseResult chan_vese_segment(const ScalarField& y, const GaussianClassModel& model,
                                 const AmfParams& params);

/// Modified Otsu initialization: scans 256 quantile bins for the threshold
/// maximizing the two-class Gaussian log-likelihood with per-class mean and
/// standard deviation.
GaussianClassModel otsu_init(const ScalarField& y);

struct AlternatingResult {
  ProbabilityField theta;
  LabelField map;
  GaussianClassModel gaussian;
  KdeModel kde_fg, kde_bg;
  int outer_iterations = 0;
  bool degenerate = false;
};

/// Alternates AMF solving and class-model re-estimation from the binarized
/// MAP until the MAP changes on fewer than cfg.tol of the pixels. A
/// degenerate round (empty class) stops the loop and flags the result.
AlternatingResult alternating_fit(const ScalarField& y, const GaussianClassModel& init,
                                  const AmfParams& params, const AlternatingConfig& cfg);
AlternatingResult alternating_fit(const ScalarField& y, const KdeModel& fg_init,
                                  const KdeModel& bg_init, const AmfParams& params,
                                  const AlternatingConfig& cfg);

struct IsingResult {
  ProbabilityField theta;
  int iterations = 0;
  bool converged = false;
};

/// Damped fixed-point iteration for the mean-field Ising stationarity
/// condition logit(theta_i) = psi_i + 4 n lambda sum_{j in N(i)} (theta_j - 1/2)
/// on a periodic 4-neighborhood (n = 4). Demonstrates the regularizer bias
/// that the TV-based model avoids.
IsingResult ising_vmf_fixed_point(const ScalarField& psi, double lambda,
                                  int max_iter = 5000, double tol = 1e-10);

}  // namespace amf
