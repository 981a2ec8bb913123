#include "amf/amf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amf {

namespace {

constexpr double kThetaEps = 1e-15;  // keeps theta strictly inside (0,1)

ProbabilityField sigmoid_field(const ScalarField& phi) {
  ProbabilityField theta(phi.width, phi.height);
  for (size_t k = 0; k < phi.values.size(); ++k)
    theta.theta[k] = std::clamp(sigmoid(phi.values[k]), kThetaEps, 1.0 - kThetaEps);
  return theta;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

Moments region_moments(const ScalarField& y, const LabelField& z, std::uint8_t label) {
  Moments m;
  double sum = 0.0, sum2 = 0.0;
  for (size_t k = 0; k < y.values.size(); ++k) {
    if (z.labels[k] == label) {
      sum += y.values[k];
      sum2 += y.values[k] * y.values[k];
      ++m.count;
    }
  }
  if (m.count > 0) {
    m.mean = sum / m.count;
    const double var = std::max(sum2 / m.count - m.mean * m.mean, 0.0);
    m.sd = std::max(std::sqrt(var), 1e-6);
  }
  return m;
}

std::vector<double> region_samples(const ScalarField& y, const LabelField& z,
                                   std::uint8_t label, size_t cap = 2048) {
  std::vector<double> all;
  for (size_t k = 0; k < y.values.size(); ++k)
    if (z.labels[k] == label) all.push_back(y.values[k]);
  if (all.size() <= cap) return all;
  std::vector<double> out;
  out.reserve(cap);
  const double stride = static_cast<double>(all.size()) / cap;
  for (size_t k = 0; k < cap; ++k) out.push_back(all[static_cast<size_t>(k * stride)]);
  return out;
}

double changed_fraction(const LabelField& a, const LabelField& b) {
  int n = 0;
  for (size_t k = 0; k < a.labels.size(); ++k)
    if (a.labels[k] != b.labels[k]) ++n;
  return static_cast<double>(n) / a.size();
}

// re-estimated class models; which family is active depends on cfg.estimator
struct FittedModels {
  bool use_kde = false;
  GaussianClassModel gauss;
  KdeModel fg, bg;

  ScalarField make_psi(const ScalarField& y) const {
    return use_kde ? psi_kde(y, fg, bg) : psi_gaussian(y, gauss);
  }

  void refit(const ScalarField& y, const LabelField& map, Estimator estimator) {
    if (estimator == Estimator::Kde) {
      fg = kde_fit(region_samples(y, map, 1));
      bg = kde_fit(region_samples(y, map, 0));
      use_kde = true;
    } else {
      const Moments m0 = region_moments(y, map, 0);
      const Moments m1 = region_moments(y, map, 1);
      gauss = GaussianClassModel{m0.mean, m0.sd, m1.mean, m1.sd};
      use_kde = false;
    }
  }
};

AlternatingResult alternating_loop(const ScalarField& y, FittedModels models,
                                   const AmfParams& params, const AlternatingConfig& cfg) {
  if (cfg.max_outer < 1) throw std::invalid_argument("alternating_fit: max_outer must be >= 1");
  AlternatingResult res;
  AmfResult sol = amf_solve_detail(models.make_psi(y), params);
  res.theta = sol.theta;
  res.map = map_labels(res.theta);

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const int fg = res.map.foreground_count();
    if (fg == 0 || fg == res.map.size()) {
      res.degenerate = true;
      break;
    }
    models.refit(y, res.map, cfg.estimator);
    sol = amf_solve_detail(models.make_psi(y), params);
    ProbabilityField theta_new = sol.theta;
    LabelField map_new = map_labels(theta_new);
    const double frac = changed_fraction(map_new, res.map);
    res.theta = std::move(theta_new);
    res.map = std::move(map_new);
    res.outer_iterations = outer;
    if (frac < cfg.tol) break;
  }
  res.gaussian = models.gauss;
  res.kde_fg = models.fg;
  res.kde_bg = models.bg;
  return res;
}

}  // namespace

AmfResult amf_solve_detail(const ScalarField& psi, const AmfParams& params) {
  if (params.lambda < 0.0) throw std::invalid_argument("amf_solve: lambda must be >= 0");
  AmfResult res;
  if (params.lambda == 0.0) {
    res.phi = psi;
    res.rof.u = psi;
    res.rof.dual = DualField(psi.width, psi.height);
    res.rof.converged = true;
    res.rof.final_energy = 0.0;
  } else {
    res.rof = rof_solve(psi, params.lambda, params.rof);
    res.phi = res.rof.u;
  }
  res.theta = sigmoid_field(res.phi);
  return res;
}

ProbabilityField amf_solve(const ScalarField& psi, const AmfParams& params) {
  return amf_solve_detail(psi, params).theta;
}

double amf_energy(const ProbabilityField& theta, const ScalarField& psi,
                  const AmfParams& params) {
  if (theta.width != psi.width || theta.height != psi.height)
    throw std::invalid_argument("amf_energy: dimension mismatch");
  double e = 0.0;
  ScalarField t(theta.width, theta.height);
  for (size_t k = 0; k < theta.theta.size(); ++k) {
    const double th = theta.theta[k];
    t.values[k] = th;
    e -= th * psi.values[k];
    if (th > 0.0) e += th * std::log(th);
    if (th < 1.0) e += (1.0 - th) * std::log(1.0 - th);
  }
  return e + params.lambda * total_variation(t, params.rof.mode);
}

LabelField map_labels(const ProbabilityField& theta, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("map_labels: threshold must lie in (0,1)");
  LabelField z(theta.width, theta.height);
  for (size_t k = 0; k < theta.theta.size(); ++k)
    z.labels[k] = theta.theta[k] > threshold ? 1 : 0;
  return z;
}

LabelField level_set_labels(const ScalarField& phi, double nu) {
  LabelField z(phi.width, phi.height);
  for (size_t k = 0; k < phi.values.size(); ++k) z.labels[k] = phi.values[k] > nu ? 1 : 0;
  return z;
}

ChanVeseResult chan_vese_segment(const ScalarField& y, const GaussianClassModel& model,
                                 const AmfParams& params) {
  ChanVeseResult res;
  res.theta = amf_solve(psi_gaussian(y, model), params);
  res.labels = map_labels(res.theta);
  return res;
}

GaussianClassModel otsu_init(const ScalarField& y) {
  std::vector<double> sorted = y.values;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (sorted.front() == sorted.back()) throw std::invalid_argument("otsu_init: constant image");

  std::vector<double> pre_sum(n + 1, 0.0), pre_sum2(n + 1, 0.0);
  for (size_t k = 0; k < n; ++k) {
    pre_sum[k + 1] = pre_sum[k] + sorted[k];
    pre_sum2[k + 1] = pre_sum2[k] + sorted[k] * sorted[k];
  }

  const double var_floor = 1e-12;
  double best_obj = 0.0;
  size_t best_split = 0;
  bool found = false;
  for (int b = 1; b < 256; ++b) {
    // split after index m-1: class 0 = sorted[0..m), class 1 = sorted[m..n)
    const size_t m = std::clamp<size_t>(n * static_cast<size_t>(b) / 256, 1, n - 1);
    if (sorted[m - 1] == sorted[m]) continue;  // not between distinct values
    const double n0 = static_cast<double>(m), n1 = static_cast<double>(n - m);
    const double mu0 = pre_sum[m] / n0;
    const double mu1 = (pre_sum[n] - pre_sum[m]) / n1;
    const double v0 = std::max(pre_sum2[m] / n0 - mu0 * mu0, var_floor);
    const double v1 = std::max((pre_sum2[n] - pre_sum2[m]) / n1 - mu1 * mu1, var_floor);
    const double obj = -(n0 * std::log(v0) + n1 * std::log(v1));  // 2x log-likelihood + const
    if (!found || obj > best_obj) {
      best_obj = obj;
      best_split = m;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("otsu_init: no usable threshold");

  const size_t m = best_split;
  GaussianClassModel model;
  model.mu0 = pre_sum[m] / m;
  model.mu1 = (pre_sum[n] - pre_sum[m]) / (n - m);
  model.sigma0 = std::max(std::sqrt(std::max(pre_sum2[m] / m - model.mu0 * model.mu0, 0.0)), 1e-6);
  model.sigma1 = std::max(
      std::sqrt(std::max((pre_sum2[n] - pre_sum2[m]) / (n - m) - model.mu1 * model.mu1, 0.0)),
      1e-6);
  return model;
}

AlternatingResult alternating_fit(const ScalarField& y, const GaussianClassModel& init,
                                  const AmfParams& params, const AlternatingConfig& cfg) {
  FittedModels models;
  models.gauss = init;
  models.use_kde = false;
  return alternating_loop(y, std::move(models), params, cfg);
}

AlternatingResult alternating_fit(const ScalarField& y, const KdeModel& fg_init,
                                  const KdeModel& bg_init, const AmfParams& params,
                                  const AlternatingConfig& cfg) {
  FittedModels models;
  models.fg = fg_init;
  models.bg = bg_init;
  models.use_kde = true;
  return alternating_loop(y, std::move(models), params, cfg);
}

IsingResult ising_vmf_fixed_point(const ScalarField& psi, double lambda, int max_iter,
                                  double tol) {
  if (lambda < 0.0) throw std::invalid_argument("ising_vmf_fixed_point: lambda must be >= 0");
  const int w = psi.width, h = psi.height, n = 4;
  IsingResult res;
  res.theta = ProbabilityField(w, h, 0.5);
  if (lambda == 0.0) {
    for (size_t k = 0; k < psi.values.size(); ++k) res.theta.theta[k] = sigmoid(psi.values[k]);
    res.converged = true;
    return res;
  }

  const double damping = 0.5;
  std::vector<double> next(res.theta.theta.size());
  for (int it = 1; it <= max_iter; ++it) {
    double max_diff = 0.0;
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const size_t k = static_cast<size_t>(j) * w + i;
        // periodic wrap keeps every site at exactly n neighbors
        const double nb = res.theta.at((i + 1) % w, j) + res.theta.at((i + w - 1) % w, j) +
                          res.theta.at(i, (j + 1) % h) + res.theta.at(i, (j + h - 1) % h);
        const double target = sigmoid(psi.values[k] + 4.0 * n * lambda * (nb - 2.0));
        next[k] = (1.0 - damping) * res.theta.theta[k] + damping * target;
        max_diff = std::max(max_diff, std::abs(next[k] - res.theta.theta[k]));
      }
    }
    res.theta.theta = next;
    res.iterations = it;
    if (max_diff < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace amf
