#include "amf/posterior.hpp"

#include "amf/amf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace amf {

namespace {

double uniform01(std::mt19937_64& gen) {
  return (gen() >> 11) * 0x1.0p-53;
}

// local anisotropic boundary-length change when flipping pixel (i,j) to 1
// versus 0: each incident pair contributes |z_i - z_j|
double aniso_delta(const LabelField& z, int i, int j) {
  int neighbors = 0, active = 0;
  auto visit = [&](int a, int b) {
    ++neighbors;
    active += z.at(a, b);
  };
  if (i > 0) visit(i - 1, j);
  if (i < z.width - 1) visit(i + 1, j);
  if (j > 0) visit(i, j - 1);
  if (j < z.height - 1) visit(i, j + 1);
  return static_cast<double>(neighbors - 2 * active);
}

double iso_site_magnitude(const LabelField& z, int a, int b, int i, int j, int v) {
  auto val = [&](int x, int y) -> double {
    if (x == i && y == j) return v;
    return z.at(x, y);
  };
  const double gx = (a < z.width - 1) ? val(a + 1, b) - val(a, b) : 0.0;
  const double gy = (b < z.height - 1) ? val(a, b + 1) - val(a, b) : 0.0;
  return std::sqrt(gx * gx + gy * gy);
}

// isotropic variant: the magnitudes at (i,j), (i-1,j), (i,j-1) are the only
// TV terms containing pixel (i,j)
double iso_delta(const LabelField& z, int i, int j) {
  double d = 0.0;
  for (int v : {1, 0}) {
    double local = iso_site_magnitude(z, i, j, i, j, v);
    if (i > 0) local += iso_site_magnitude(z, i - 1, j, i, j, v);
    if (j > 0) local += iso_site_magnitude(z, i, j - 1, i, j, v);
    d += (v == 1) ? local : -local;
  }
  return d;
}

void run_chain(const ScalarField& psi, double lambda, const GibbsConfig& cfg, int chain_id,
               std::vector<GibbsParticle>& particles, std::vector<double>& area_trace,
               std::vector<double>& energy_trace) {
  const int w = psi.width, h = psi.height;
  std::mt19937_64 gen(cfg.seed + static_cast<std::uint64_t>(chain_id) * 0x9e3779b97f4a7c15ULL);

  LabelField z(w, h);
  for (auto& v : z.labels) v = uniform01(gen) < 0.5 ? 0 : 1;

  const double inv_t = 1.0 / cfg.temperature;
  for (int sweep = 1; sweep <= cfg.sweeps_per_chain; ++sweep) {
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        const double dl = cfg.mode == TvMode::Anisotropic ? aniso_delta(z, i, j)
                                                          : iso_delta(z, i, j);
        const double p1 = sigmoid((psi.at(i, j) - lambda * dl) * inv_t);
        z.at(i, j) = uniform01(gen) < p1 ? 1 : 0;
      }
    }
    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0) {
      particles.push_back({chain_id, sweep, z});
      area_trace.push_back(static_cast<double>(z.foreground_count()));
      energy_trace.push_back(log_posterior_unnorm(z, psi, lambda, cfg.mode));
    }
  }
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double da = a[k] - ma, db = b[k] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw std::invalid_argument("compare_correlation: zero-variance mass sequence");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

void GibbsConfig::validate() const {
  if (chains < 1) throw std::invalid_argument("GibbsConfig: chains must be >= 1");
  if (sweeps_per_chain < 1)
    throw std::invalid_argument("GibbsConfig: sweeps_per_chain must be >= 1");
  if (temperature <= 0.0) throw std::invalid_argument("GibbsConfig: temperature must be > 0");
  if (thin < 1) throw std::invalid_argument("GibbsConfig: thin must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("GibbsConfig: burn_in must be >= 0");
  if (burn_in >= sweeps_per_chain)
    throw std::invalid_argument("GibbsConfig: burn_in leaves no sweeps to retain");
}

double log_posterior_unnorm(const LabelField& z, const ScalarField& psi, double lambda,
                            TvMode mode) {
  if (z.width != psi.width || z.height != psi.height)
    throw std::invalid_argument("log_posterior_unnorm: dimension mismatch");
  double s = 0.0;
  for (size_t k = 0; k < z.labels.size(); ++k)
    if (z.labels[k]) s += psi.values[k];
  return s - lambda * boundary_length(z, mode);
}

double log_q(const LabelField& z, const ProbabilityField& theta) {
  if (z.width != theta.width || z.height != theta.height)
    throw std::invalid_argument("log_q: dimension mismatch");
  const ClampRange clamp;
  double s = 0.0;
  for (size_t k = 0; k < z.labels.size(); ++k) {
    const double th = std::clamp(theta.theta[k], clamp.lo, clamp.hi);
    s += z.labels[k] ? std::log(th) : std::log(1.0 - th);
  }
  return s;
}

SampleSet gibbs_sample(const ScalarField& psi, double lambda, const GibbsConfig& cfg) {
  cfg.validate();
  SampleSet out;
  out.width = psi.width;
  out.height = psi.height;
  out.chains = cfg.chains;
  out.mode = cfg.mode;
  out.area_traces.resize(cfg.chains);
  out.energy_traces.resize(cfg.chains);

  std::vector<std::vector<GibbsParticle>> per_chain(cfg.chains);
  const int threads = std::min(cfg.threads, cfg.chains);
  if (threads > 1) {
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (int c = next.fetch_add(1); c < cfg.chains; c = next.fetch_add(1))
          run_chain(psi, lambda, cfg, c, per_chain[c], out.area_traces[c],
                    out.energy_traces[c]);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int c = 0; c < cfg.chains; ++c)
      run_chain(psi, lambda, cfg, c, per_chain[c], out.area_traces[c], out.energy_traces[c]);
  }
  for (auto& chunk : per_chain)
    for (auto& p : chunk) out.particles.push_back(std::move(p));
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& traces) {
  if (traces.size() < 2) throw std::invalid_argument("gelman_rubin: need >= 2 chains");
  size_t n = traces.front().size();
  for (const auto& t : traces) n = std::min(n, t.size());
  if (n < 10) throw std::invalid_argument("gelman_rubin: need >= 10 points per chain");

  const double m = static_cast<double>(traces.size());
  const double dn = static_cast<double>(n);
  std::vector<double> means;
  double w_sum = 0.0;
  for (const auto& t : traces) {
    double mu = 0.0;
    for (size_t k = 0; k < n; ++k) mu += t[k];
    mu /= dn;
    double var = 0.0;
    for (size_t k = 0; k < n; ++k) var += (t[k] - mu) * (t[k] - mu);
    var /= dn - 1.0;
    means.push_back(mu);
    w_sum += var;
  }
  const double w = w_sum / m;
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= m;
  // zero-variance traces (up to accumulation dust) are defined as converged
  if (w <= 1e-24 * std::max(1.0, grand * grand)) return 1.0;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= m - 1.0;

  const double v_hat = (dn - 1.0) / dn * w + b_over_n * (1.0 + 1.0 / m);
  return std::sqrt(v_hat / w);
}

double compare_correlation(const SampleSet& samples, const ScalarField& psi, double lambda,
                           const ProbabilityField& theta, TvMode mode) {
  if (samples.particles.size() < 2)
    throw std::invalid_argument("compare_correlation: need >= 2 particles");
  std::vector<double> a, b;
  a.reserve(samples.particles.size());
  b.reserve(samples.particles.size());
  for (const auto& p : samples.particles) {
    a.push_back(log_posterior_unnorm(p.labels, psi, lambda, mode));
    b.push_back(log_q(p.labels, theta));
  }
  const double amax = *std::max_element(a.begin(), a.end());
  const double bmax = *std::max_element(b.begin(), b.end());
  for (auto& v : a) v = std::exp(v - amax);
  for (auto& v : b) v = std::exp(v - bmax);
  return pearson(a, b);
}

AreaMoments q_area_moments(const ProbabilityField& theta) {
  AreaMoments m;
  for (double th : theta.theta) {
    m.mean += th;
    m.variance += th * (1.0 - th);
  }
  return m;
}

AreaMoments sample_area_moments(const SampleSet& samples) {
  if (samples.particles.empty())
    throw std::invalid_argument("sample_area_moments: empty sample set");
  const double n = static_cast<double>(samples.particles.size());
  AreaMoments m;
  for (const auto& p : samples.particles) m.mean += p.labels.foreground_count();
  m.mean /= n;
  if (samples.particles.size() > 1) {
    for (const auto& p : samples.particles) {
      const double d = p.labels.foreground_count() - m.mean;
      m.variance += d * d;
    }
    m.variance /= n - 1.0;
  }
  return m;
}

double log_ratio_gap(const LabelField& z, const LabelField& z0, const ScalarField& psi,
                     double lambda, const ProbabilityField& theta, TvMode mode) {
  if (z.width != z0.width || z.height != z0.height || z.width != psi.width ||
      z.height != psi.height || z.width != theta.width || z.height != theta.height)
    throw std::invalid_argument("log_ratio_gap: dimension mismatch");
  const ScalarField phi = logit_field(theta);
  double p_ratio = 0.0, q_ratio = 0.0;
  for (size_t k = 0; k < z.labels.size(); ++k) {
    const double dz = static_cast<double>(z.labels[k]) - z0.labels[k];
    p_ratio += dz * psi.values[k];
    q_ratio += dz * phi.values[k];
  }
  p_ratio -= lambda * (boundary_length(z, mode) - boundary_length(z0, mode));
  return p_ratio - q_ratio;
}

PosteriorMap enumerate_posterior_map(const ScalarField& psi, double lambda, TvMode mode) {
  const int n = psi.size();
  if (n > 20) throw std::invalid_argument("enumerate_posterior_map: grid too large");
  PosteriorMap out;
  out.argmax = LabelField(psi.width, psi.height);
  out.best = log_posterior_unnorm(out.argmax, psi, lambda, mode);
  out.runner_up = -std::numeric_limits<double>::infinity();
  LabelField z(psi.width, psi.height);
  for (std::uint32_t state = 1; state < (1u << n); ++state) {
    for (int k = 0; k < n; ++k) z.labels[k] = (state >> k) & 1u;
    const double lp = log_posterior_unnorm(z, psi, lambda, mode);
    if (lp > out.best) {
      out.runner_up = out.best;
      out.best = lp;
      out.argmax = z;
    } else {
      out.runner_up = std::max(out.runner_up, lp);
    }
  }
  return out;
}

bool map_agreement(const ScalarField& psi, double lambda, TvMode mode) {
  const PosteriorMap exact = enumerate_posterior_map(psi, lambda, mode);
  AmfParams params;
  params.lambda = lambda;
  params.rof.mode = mode;
  params.rof.tol = 1e-12;
  params.rof.max_iter = 50000;
  params.rof.dual_gap_tol = 1e-12;
  const LabelField approx = map_labels(amf_solve(psi, params));
  return approx.labels == exact.argmax.labels;
}

}  // namespace amf
