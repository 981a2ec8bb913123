#include "amf/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace amf {

namespace {

constexpr double kDensityFloor = 1e-12;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double gauss_log_density(double y, double mu, double sigma) {
  const double z = (y - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double gauss_density(double y, double mu, double sigma) {
  return std::exp(gauss_log_density(y, mu, sigma));
}

}  // namespace

void MixtureModel::validate() const {
  if (components.empty()) throw std::invalid_argument("MixtureModel: no components");
  double wsum = 0.0;
  for (const auto& c : components) {
    if (c.sigma <= 0.0) throw std::invalid_argument("MixtureModel: sigma must be > 0");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("MixtureModel: weights must sum to 1");
}

double MixtureModel::density(double y) const {
  double d = 0.0;
  for (const auto& c : components) d += c.weight * gauss_density(y, c.mu, c.sigma);
  return d;
}

double KdeModel::density(double y) const {
  double d = 0.0;
  for (double s : samples) d += gauss_density(y, s, bandwidth);
  return d / samples.size();
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: p must lie in (0,1)");
  return std::log(p / (1.0 - p));
}

double sigmoid(double phi) { return 1.0 / (1.0 + std::exp(-phi)); }

ScalarField logit_field(const ProbabilityField& p, ClampRange clamp) {
  ScalarField psi(p.width, p.height);
  for (size_t k = 0; k < p.theta.size(); ++k)
    psi.values[k] = logit(std::clamp(p.theta[k], clamp.lo, clamp.hi));
  return psi;
}

ScalarField psi_gaussian(const ScalarField& y, const GaussianClassModel& m) {
  if (m.sigma0 <= 0.0 || m.sigma1 <= 0.0)
    throw std::invalid_argument("psi_gaussian: sigmas must be > 0");
  ScalarField psi(y.width, y.height);
  for (size_t k = 0; k < y.values.size(); ++k)
    psi.values[k] = gauss_log_density(y.values[k], m.mu1, m.sigma1) -
                    gauss_log_density(y.values[k], m.mu0, m.sigma0);
  return psi;
}

ScalarField psi_mixture(const ScalarField& y, const MixtureModel& fg, const MixtureModel& bg) {
  fg.validate();
  bg.validate();
  ScalarField psi(y.width, y.height);
  for (size_t k = 0; k < y.values.size(); ++k) {
    const double pf = std::max(fg.density(y.values[k]), kDensityFloor);
    const double pb = std::max(bg.density(y.values[k]), kDensityFloor);
    psi.values[k] = std::log(pf) - std::log(pb);
  }
  return psi;
}

ScalarField psi_from_probability(const ProbabilityField& p, ClampRange clamp) {
  return logit_field(p, clamp);
}

KdeModel kde_fit(const std::vector<double>& samples, double bandwidth) {
  if (samples.empty()) throw std::invalid_argument("kde_fit: empty sample set");
  KdeModel m;
  m.samples = samples;
  if (bandwidth > 0.0) {
    m.bandwidth = bandwidth;
    return m;
  }
  const double n = static_cast<double>(samples.size());
  double mu = 0.0;
  for (double s : samples) mu += s;
  mu /= n;
  double var = 0.0;
  for (double s : samples) var += (s - mu) * (s - mu);
  var /= std::max(n - 1.0, 1.0);
  const double sd = std::sqrt(var);
  // Silverman's rule of thumb; floor keeps degenerate sample sets usable.
  m.bandwidth = std::max(1.06 * sd * std::pow(n, -0.2), 1e-6);
  return m;
}

ScalarField psi_kde(const ScalarField& y, const KdeModel& fg, const KdeModel& bg) {
  if (fg.samples.empty() || bg.samples.empty())
    throw std::invalid_argument("psi_kde: empty sample set");
  ScalarField psi(y.width, y.height);
  for (size_t k = 0; k < y.values.size(); ++k) {
    const double pf = std::max(fg.density(y.values[k]), kDensityFloor);
    const double pb = std::max(bg.density(y.values[k]), kDensityFloor);
    psi.values[k] = std::log(pf) - std::log(pb);
  }
  return psi;
}

}  // namespace amf
