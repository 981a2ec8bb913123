#include "amf/rof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amf {

namespace {

void project_dual(DualField& p, TvMode mode) {
  if (mode == TvMode::Isotropic) {
    for (size_t k = 0; k < p.px.size(); ++k) {
      const double m = std::sqrt(p.px[k] * p.px[k] + p.py[k] * p.py[k]);
      if (m > 1.0) {
        p.px[k] /= m;
        p.py[k] /= m;
      }
    }
  } else {
    for (size_t k = 0; k < p.px.size(); ++k) {
      p.px[k] = std::clamp(p.px[k], -1.0, 1.0);
      p.py[k] = std::clamp(p.py[k], -1.0, 1.0);
    }
  }
}

ScalarField primal_from_dual(const ScalarField& u0, double alpha, const DualField& p) {
  ScalarField u = divergence(p);
  for (size_t k = 0; k < u.values.size(); ++k)
    u.values[k] = u0.values[k] - alpha * u.values[k];
  return u;
}

double rel_change(const ScalarField& a, const ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < a.values.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    num += d * d;
    den += a.values[k] * a.values[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-30);
}

// alpha * (TV(u) + <grad u, p>): zero exactly at a primal-dual optimal pair,
// and a sum of nonnegative per-pixel terms for feasible p
double duality_gap(const ScalarField& u, const DualField& p, double alpha, TvMode mode) {
  const DualField g = gradient(u);
  double gap = 0.0;
  if (mode == TvMode::Isotropic) {
    for (size_t k = 0; k < g.px.size(); ++k)
      gap += std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k]) + g.px[k] * p.px[k] +
             g.py[k] * p.py[k];
  } else {
    for (size_t k = 0; k < g.px.size(); ++k)
      gap += std::abs(g.px[k]) + std::abs(g.py[k]) + g.px[k] * p.px[k] + g.py[k] * p.py[k];
  }
  return alpha * gap;
}

double smoothed_tv(const ScalarField& u, double beta, TvMode mode) {
  const DualField g = gradient(u);
  double s = 0.0;
  const double b2 = beta * beta;
  if (mode == TvMode::Isotropic) {
    for (size_t k = 0; k < g.px.size(); ++k)
      s += std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k] + b2);
  } else {
    for (size_t k = 0; k < g.px.size(); ++k)
      s += std::sqrt(g.px[k] * g.px[k] + b2) + std::sqrt(g.py[k] * g.py[k] + b2);
  }
  return s;
}

double smoothed_energy(const ScalarField& u, const ScalarField& u0, double alpha,
                       double beta, TvMode mode) {
  double fid = 0.0;
  for (size_t k = 0; k < u.values.size(); ++k) {
    const double d = u.values[k] - u0.values[k];
    fid += d * d;
  }
  return 0.5 * fid + alpha * smoothed_tv(u, beta, mode);
}

ScalarField smoothed_energy_gradient(const ScalarField& u, const ScalarField& u0,
                                     double alpha, double beta, TvMode mode) {
  DualField g = gradient(u);
  const double b2 = beta * beta;
  if (mode == TvMode::Isotropic) {
    for (size_t k = 0; k < g.px.size(); ++k) {
      const double m = std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k] + b2);
      g.px[k] /= m;
      g.py[k] /= m;
    }
  } else {
    for (size_t k = 0; k < g.px.size(); ++k) {
      g.px[k] /= std::sqrt(g.px[k] * g.px[k] + b2);
      g.py[k] /= std::sqrt(g.py[k] * g.py[k] + b2);
    }
  }
  ScalarField grad = divergence(g);
  for (size_t k = 0; k < grad.values.size(); ++k)
    grad.values[k] = (u.values[k] - u0.values[k]) - alpha * grad.values[k];
  return grad;
}

}  // namespace

double rof_energy(const ScalarField& u, const ScalarField& u0, double alpha, TvMode mode) {
  if (!u.same_shape(u0)) throw std::invalid_argument("rof_energy: dimension mismatch");
  if (alpha <= 0.0) throw std::invalid_argument("rof_energy: alpha must be > 0");
  double fid = 0.0;
  for (size_t k = 0; k < u.values.size(); ++k) {
    const double d = u.values[k] - u0.values[k];
    fid += d * d;
  }
  return 0.5 * fid + alpha * total_variation(u, mode);
}

RofResult rof_solve(const ScalarField& u0, double alpha, const RofParams& params) {
  if (alpha <= 0.0) throw std::invalid_argument("rof_solve: alpha must be > 0");
  if (params.tol <= 0.0 || params.max_iter < 1)
    throw std::invalid_argument("rof_solve: invalid params");

  const int w = u0.width, h = u0.height;
  const double step = 0.125;  // 1/L for the 2D forward-difference Laplacian

  DualField p(w, h), y(w, h);
  double t = 1.0;

  const bool want_gap = params.dual_gap_tol > 0.0;
  RofResult best;
  best.u = u0;
  best.dual = DualField(w, h);
  best.final_energy = rof_energy(u0, u0, alpha, params.mode);
  best.dual_gap = duality_gap(u0, best.dual, alpha, params.mode);

  ScalarField u_prev = u0;
  int it = 0;
  bool converged = false;
  for (it = 1; it <= params.max_iter; ++it) {
    // s = div(y) - u0/alpha, gradient ascent step on the dual objective
    ScalarField s = divergence(y);
    for (size_t k = 0; k < s.values.size(); ++k)
      s.values[k] -= u0.values[k] / alpha;
    const DualField g = gradient(s);

    DualField p_new = y;
    for (size_t k = 0; k < p_new.px.size(); ++k) {
      p_new.px[k] += step * g.px[k];
      p_new.py[k] += step * g.py[k];
    }
    project_dual(p_new, params.mode);

    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_new;
    for (size_t k = 0; k < y.px.size(); ++k) {
      y.px[k] = p_new.px[k] + momentum * (p_new.px[k] - p.px[k]);
      y.py[k] = p_new.py[k] + momentum * (p_new.py[k] - p.py[k]);
    }
    p = p_new;
    t = t_new;

    ScalarField u = primal_from_dual(u0, alpha, p);
    const double e = rof_energy(u, u0, alpha, params.mode);
    const double gap = want_gap ? duality_gap(u, p, alpha, params.mode) : 0.0;
    const bool improved = want_gap ? gap < best.dual_gap : e < best.final_energy;
    if (improved) {
      best.final_energy = e;
      best.dual_gap = gap;
      best.u = u;
      best.dual = p;
    }
    const double change = rel_change(u, u_prev);
    u_prev = std::move(u);
    if (change < params.tol && (!want_gap || gap <= params.dual_gap_tol)) {
      converged = true;
      break;
    }
  }
  best.iterations = std::min(it, params.max_iter);
  best.converged = converged;
  return best;
}

namespace {

// One continuation stage: accelerated gradient descent on the beta-smoothed
// energy. The fidelity term makes the energy 1-strongly convex, so
// E - E* <= |grad E|^2 / 2 certifies the stage accuracy; L = 1 + 8 alpha/beta
// bounds the curvature. Momentum restarts on energy increase; a backtracking
// halving of the step guards against an optimistic L.
bool smoothed_stage(ScalarField& u, const ScalarField& u0, double alpha, double beta,
                    TvMode mode, double delta, int max_iter, int* iters) {
  const double lipschitz = 1.0 + 8.0 * alpha / beta;
  double step = 1.0 / lipschitz;
  const double sqrt_kappa = std::sqrt(lipschitz);
  const double momentum = (sqrt_kappa - 1.0) / (sqrt_kappa + 1.0);

  ScalarField u_prev = u;
  double e = smoothed_energy(u, u0, alpha, beta, mode);
  for (int it = 0; it < max_iter; ++it) {
    ++*iters;
    ScalarField v = u;
    for (size_t k = 0; k < v.values.size(); ++k)
      v.values[k] += momentum * (u.values[k] - u_prev.values[k]);
    const ScalarField g = smoothed_energy_gradient(v, u0, alpha, beta, mode);
    ScalarField u_next = v;
    for (size_t k = 0; k < u_next.values.size(); ++k) u_next.values[k] -= step * g.values[k];

    double e_next = smoothed_energy(u_next, u0, alpha, beta, mode);
    if (e_next > e) {
      // restart from the last monotone iterate with a guarded plain step
      const ScalarField gu = smoothed_energy_gradient(u, u0, alpha, beta, mode);
      double s = step;
      double gnorm2 = 0.0;
      for (double x : gu.values) gnorm2 += x * x;
      while (s > 1e-18) {
        for (size_t k = 0; k < u_next.values.size(); ++k)
          u_next.values[k] = u.values[k] - s * gu.values[k];
        e_next = smoothed_energy(u_next, u0, alpha, beta, mode);
        if (e_next <= e - 1e-4 * s * gnorm2) break;
        s *= 0.5;
      }
      u_prev = u_next;  // zero momentum after restart
    } else {
      u_prev = std::move(u);
    }
    u = std::move(u_next);
    e = e_next;

    if (it % 5 == 0) {
      const ScalarField gu = smoothed_energy_gradient(u, u0, alpha, beta, mode);
      double gnorm2 = 0.0;
      for (double x : gu.values) gnorm2 += x * x;
      if (0.5 * gnorm2 <= delta) return true;
    }
  }
  return false;
}

}  // namespace

RofResult rof_solve_reference(const ScalarField& u0, double alpha, double beta,
                              const RofParams& params) {
  if (alpha <= 0.0) throw std::invalid_argument("rof_solve_reference: alpha must be > 0");
  if (beta <= 0.0) throw std::invalid_argument("rof_solve_reference: beta must be > 0");

  double lo = u0.values[0], hi = u0.values[0];
  for (double v : u0.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = std::max(hi - lo, 1e-12);

  // Continuation from a heavily smoothed energy down to the target beta; the
  // target-beta problem is too stiff to solve cold.
  std::vector<double> betas;
  for (double b = std::max(beta, 0.05 * range); b > beta; b *= 0.1)
    betas.push_back(b);
  betas.push_back(beta);

  ScalarField u = u0;
  int total_iters = 0;
  bool converged = false;
  const double e0 = smoothed_energy(u0, u0, alpha, betas.front(), params.mode);
  const double delta = params.tol * std::max(1.0, e0);

  for (double b : betas)
    converged = smoothed_stage(u, u0, alpha, b, params.mode, delta, params.max_iter,
                               &total_iters);

  RofResult res;
  res.u = std::move(u);
  res.dual = DualField(u0.width, u0.height);
  res.iterations = total_iters;
  res.final_energy = rof_energy(res.u, u0, alpha, params.mode);
  res.converged = converged;
  return res;
}

}  // namespace amf
