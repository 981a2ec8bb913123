#include "amf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace amf {

double NormalSampler::uniform() { return (gen_() >> 11) * 0x1.0p-53; }

double NormalSampler::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double matern_covariance(double d, double l, int p) {
  if (d < 0.0) throw std::invalid_argument("matern_covariance: d must be >= 0");
  if (l <= 0.0) throw std::invalid_argument("matern_covariance: l must be > 0");
  if (p < 0) throw std::invalid_argument("matern_covariance: p must be >= 0");
  // half-integer smoothness nu = p + 1/2:
  // C(d) = exp(-s) * p!/(2p)! * sum_{i=0}^{p} (p+i)!/(i!(p-i)!) (2s)^{p-i},
  // s = sqrt(2 nu) d / l
  const double s = std::sqrt(2.0 * (p + 0.5)) * d / l;
  auto factorial = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  double sum = 0.0;
  for (int i = 0; i <= p; ++i)
    sum += factorial(p + i) / (factorial(i) * factorial(p - i)) * std::pow(2.0 * s, p - i);
  return std::exp(-s) * factorial(p) / factorial(2 * p) * sum;
}

MaternGpSampler::MaternGpSampler(int size, double length_l, int order_p) : size_(size) {
  if (size < 2) throw std::invalid_argument("MaternGpSampler: size must be >= 2");
  if (size > 64)
    throw std::invalid_argument("MaternGpSampler: dense method limited to size <= 64");
  const int n = size * size;
  std::vector<double> cov(static_cast<size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    const double ax = a % size, ay = a / size;
    for (int b = 0; b <= a; ++b) {
      const double dx = ax - b % size, dy = ay - b / size;
      const double c = matern_covariance(std::sqrt(dx * dx + dy * dy), length_l, order_p);
      cov[static_cast<size_t>(a) * n + b] = c;
      cov[static_cast<size_t>(b) * n + a] = c;
    }
  }
  for (int a = 0; a < n; ++a) cov[static_cast<size_t>(a) * n + a] += 1e-10;  // jitter

  // in-place lower Cholesky
  for (int k = 0; k < n; ++k) {
    double* rk = cov.data() + static_cast<size_t>(k) * n;
    double diag = rk[k];
    for (int m = 0; m < k; ++m) diag -= rk[m] * rk[m];
    if (diag <= 0.0)
      throw std::runtime_error("MaternGpSampler: covariance not positive definite");
    rk[k] = std::sqrt(diag);
    for (int a = k + 1; a < n; ++a) {
      double* ra = cov.data() + static_cast<size_t>(a) * n;
      double s = ra[k];
      for (int m = 0; m < k; ++m) s -= ra[m] * rk[m];
      ra[k] = s / rk[k];
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) cov[static_cast<size_t>(a) * n + b] = 0.0;
  chol_ = std::move(cov);
}

ScalarField MaternGpSampler::sample(std::uint64_t seed) const {
  const int n = size_ * size_;
  NormalSampler rng(seed);
  std::vector<double> xi(n);
  for (auto& v : xi) v = rng.next();
  ScalarField f(size_, size_);
  for (int a = 0; a < n; ++a) {
    const double* row = chol_.data() + static_cast<size_t>(a) * n;
    double s = 0.0;
    for (int b = 0; b <= a; ++b) s += row[b] * xi[b];
    f.values[a] = s;
  }
  return f;
}

ScalarField sample_gp_field(const MaternConfig& cfg) {
  MaternGpSampler sampler(cfg.size, cfg.length_l, cfg.order_p);
  return sampler.sample(cfg.seed);
}

LabelField make_ground_truth(const ScalarField& f, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("make_ground_truth: quantile must lie in (0,1)");
  std::vector<double> sorted = f.values;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  size_t idx = static_cast<size_t>(std::ceil(quantile * n));
  idx = std::min(std::max<size_t>(idx, 1), n) - 1;
  const double t = sorted[idx];
  LabelField z(f.width, f.height);
  for (size_t k = 0; k < f.values.size(); ++k) z.labels[k] = f.values[k] > t ? 1 : 0;
  return z;
}

ScalarField add_gaussian_noise(const LabelField& z, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be > 0");
  NormalSampler rng(seed);
  ScalarField y(z.width, z.height);
  for (size_t k = 0; k < z.labels.size(); ++k) y.values[k] = z.labels[k] + sigma * rng.next();
  return y;
}

AmbiguousCircle synth_ambiguous_circle(int size, std::uint64_t seed) {
  if (size < 32) throw std::invalid_argument("synth_ambiguous_circle: size must be >= 32");
  AmbiguousCircle out;
  out.clean = ScalarField(size, size, 30.0);
  out.truth = LabelField(size, size);

  const double cx = 0.5 * (size - 1), cy = 0.5 * (size - 1);
  const double radius = size / 4.0;
  NormalSampler rng(seed);
  ScalarField sigma_map(size, size, 5.0);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const double dx = i - cx, dy = j - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        out.truth.at(i, j) = 1;
        const bool upper = j < cy;
        out.clean.at(i, j) = upper ? 50.0 : 70.0;
        sigma_map.at(i, j) = upper ? 10.0 : 5.0;
      }
    }
  }
  out.noisy = out.clean;
  for (size_t k = 0; k < out.noisy.values.size(); ++k)
    out.noisy.values[k] += sigma_map.values[k] * rng.next();

  out.fg.components = {{0.5, 50.0, 10.0}, {0.5, 70.0, 5.0}};
  out.bg.components = {{0.5, 30.0, 5.0}, {0.5, 50.0, 10.0}};
  return out;
}

}  // namespace amf
