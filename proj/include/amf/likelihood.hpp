#pragma once

#include "amf/field.hpp"

#include <vector>

namespace amf {

/// Class-conditional Gaussian intensity model; class 0 is background,
/// class 1 foreground.
struct GaussianClassModel {
  double mu0 = 0.0;
  double sigma0 = 1.0;
  double mu1 = 1.0;
  double sigma1 = 1.0;
};

struct MixtureComponent {
  double weight = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
};

/// Gaussian mixture over intensities; weights must sum to 1 within 1e-9.
struct MixtureModel {
  std::vector<MixtureComponent> components;

  void validate() const;
  double density(double y) const;
};

/// Gaussian-kernel density estimate over a sample set.
struct KdeModel {
  std::vector<double> samples;
  double bandwidth = 1.0;

  double density(double y) const;
};

struct ClampRange {
  double lo = 1e-5;
  double hi = 1.0 - 1e-5;
};

double logit(double p);
double sigmoid(double phi);

/// Elementwise logit of a clamped probability field.
ScalarField logit_field(const ProbabilityField& p, ClampRange clamp = {});

/// psi = ln p(y|1) - ln p(y|0) under the Gaussian class models, computed
/// directly from the log densities.
ScalarField psi_gaussian(const ScalarField& y, const GaussianClassModel& m);

ScalarField psi_mixture(const ScalarField& y, const MixtureModel& fg, const MixtureModel& bg);

ScalarField psi_from_probability(const ProbabilityField& p, ClampRange clamp = {});

/// bandwidth <= 0 selects Silverman's rule of thumb.
KdeModel kde_fit(const std::vector<double>& samples, double bandwidth = 0.0);

ScalarField psi_kde(const ScalarField& y, const KdeModel& fg, const KdeModel& bg);

}  // namespace amf
