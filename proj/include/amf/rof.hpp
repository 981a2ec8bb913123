#pragma once

#include "amf/field.hpp"

namespace amf {

struct RofParams {
  double tol = 1e-4;     // relative change of u between iterations
  int max_iter = 10000;
  TvMode mode = TvMode::Isotropic;
  // When > 0, convergence additionally requires the primal-dual gap
  // alpha * (TV(u) + <grad u, p>) to fall below this value. The primal
  // iterate u settles long before the dual saturates at the jumps of u, and
  // the level-set identities of the posterior module need the saturated dual.
  double dual_gap_tol = 0.0;
};

struct RofResult {
  ScalarField u;
  DualField dual;       // final dual variable; u = u0 - alpha * div(dual)
  int iterations = 0;
  double final_energy = 0.0;
  double dual_gap = 0.0;
  bool converged = false;
};

/// E(u) = 1/2 ||u - u0||^2 + alpha * TV(u). The stationarity condition of
/// this normalization is u - u0 - alpha * curvature(u) = 0.
double rof_energy(const ScalarField& u, const ScalarField& u0, double alpha, TvMode mode);

/// FISTA on the dual problem. Per iteration the dual field is updated as
/// p <- project(p + (1/8) * grad(div p - u0/alpha)) with momentum; the primal
/// iterate is u = u0 - alpha * div p. Projection is onto the per-pixel unit
/// disc (isotropic) or unit box (anisotropic). Returns the best-energy
/// iterate; converged=false if the stopping rule was not met within max_iter.
RofResult rof_solve(const ScalarField& u0, double alpha, const RofParams& params);

/// Independent oracle: gradient descent with backtracking on the beta-smoothed
/// energy (TV replaced by sqrt(|grad u|^2 + beta^2) per pixel, componentwise in
/// the anisotropic case). Warm-started by beta continuation. Test use only.
RofResult rof_solve_reference(const ScalarField& u0, double alpha, double beta,
                              const RofParams& params);

}  // namespace amf
