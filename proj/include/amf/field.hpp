#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace amf {

/// Discrete total-variation variant. Isotropic sums the 2-norm of the
/// forward-difference gradient per pixel, anisotropic the 1-norm.
enum class TvMode { Isotropic, Anisotropic };

inline const char* to_string(TvMode mode) {
  return mode == TvMode::Isotropic ? "iso" : "aniso";
}

/// Real-valued 2D grid, row-major, top row first. Index (i, j) is column i,
/// row j.
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(int w, int h, double init = 0.0) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("ScalarField: dimensions must be >= 1");
    values.assign(static_cast<size_t>(w) * h, init);
  }

  int size() const { return width * height; }
  double& at(int i, int j) { return values[static_cast<size_t>(j) * width + i]; }
  double at(int i, int j) const { return values[static_cast<size_t>(j) * width + i]; }

  bool same_shape(const ScalarField& o) const {
    return width == o.width && height == o.height;
  }
};

/// Two-component vector field per pixel (gradients, ROF dual variables).
struct DualField {
  int width = 0;
  int height = 0;
  std::vector<double> px;
  std::vector<double> py;

  DualField() = default;
  DualField(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("DualField: dimensions must be >= 1");
    px.assign(static_cast<size_t>(w) * h, 0.0);
    py.assign(static_cast<size_t>(w) * h, 0.0);
  }

  int size() const { return width * height; }
};

/// Binary 2D grid; every entry is exactly 0 or 1.
struct LabelField {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelField() = default;
  LabelField(int w, int h, std::uint8_t init = 0) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("LabelField: dimensions must be >= 1");
    labels.assign(static_cast<size_t>(w) * h, init);
  }

  int size() const { return width * height; }
  std::uint8_t& at(int i, int j) { return labels[static_cast<size_t>(j) * width + i]; }
  std::uint8_t at(int i, int j) const { return labels[static_cast<size_t>(j) * width + i]; }

  int foreground_count() const {
    int n = 0;
    for (auto v : labels) n += v;
    return n;
  }
};

/// 2D grid of per-pixel Bernoulli parameters in [0, 1].
struct ProbabilityField {
  int width = 0;
  int height = 0;
  std::vector<double> theta;

  ProbabilityField() = default;
  ProbabilityField(int w, int h, double init = 0.5) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("ProbabilityField: dimensions must be >= 1");
    theta.assign(static_cast<size_t>(w) * h, init);
  }

  int size() const { return width * height; }
  double& at(int i, int j) { return theta[static_cast<size_t>(j) * width + i]; }
  double at(int i, int j) const { return theta[static_cast<size_t>(j) * width + i]; }
};

ScalarField to_scalar(const LabelField& z);

/// Forward differences with Neumann boundary: gx(i,j) = f(i+1,j) - f(i,j)
/// for i < width-1, zero on the last column; gy analogous in j.
DualField gradient(const ScalarField& f);

/// Exact negative adjoint of gradient: <grad f, v> = -<f, div v> for all f, v.
ScalarField divergence(const DualField& v);

double total_variation(const ScalarField& f, TvMode mode);

/// Boundary length of a binary labeling, realized as the total variation of
/// the 0/1 field.
double boundary_length(const LabelField& z, TvMode mode);

/// div( grad f / sqrt(|grad f|^2 + eps^2) ). Diagnostic only; solvers never
/// divide by the gradient magnitude.
ScalarField curvature(const ScalarField& f, double eps = 1e-8);

double dot(const ScalarField& a, const ScalarField& b);
double dot(const DualField& a, const DualField& b);
double mean(const ScalarField& f);

}  // namespace amf
