#include "amf/field.hpp"

#include <cmath>

namespace amf {

ScalarField to_scalar(const LabelField& z) {
  ScalarField f(z.width, z.height);
  for (size_t k = 0; k < z.labels.size(); ++k) f.values[k] = z.labels[k];
  return f;
}

DualField gradient(const ScalarField& f) {
  DualField g(f.width, f.height);
  const int w = f.width, h = f.height;
  for (int j = 0; j < h; ++j) {
    const size_t row = static_cast<size_t>(j) * w;
    for (int i = 0; i < w; ++i) {
      const size_t k = row + i;
      if (i < w - 1) g.px[k] = f.values[k + 1] - f.values[k];
      if (j < h - 1) g.py[k] = f.values[k + w] - f.values[k];
    }
  }
  return g;
}

ScalarField divergence(const DualField& v) {
  ScalarField d(v.width, v.height);
  const int w = v.width, h = v.height;
  for (int j = 0; j < h; ++j) {
    const size_t row = static_cast<size_t>(j) * w;
    for (int i = 0; i < w; ++i) {
      const size_t k = row + i;
      double s = 0.0;
      if (i < w - 1) s += v.px[k];
      if (i > 0) s -= v.px[k - 1];
      if (j < h - 1) s += v.py[k];
      if (j > 0) s -= v.py[k - w];
      d.values[k] = s;
    }
  }
  return d;
}

double total_variation(const ScalarField& f, TvMode mode) {
  const DualField g = gradient(f);
  double tv = 0.0;
  if (mode == TvMode::Isotropic) {
    for (size_t k = 0; k < g.px.size(); ++k)
      tv += std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k]);
  } else {
    for (size_t k = 0; k < g.px.size(); ++k)
      tv += std::abs(g.px[k]) + std::abs(g.py[k]);
  }
  return tv;
}

double boundary_length(const LabelField& z, TvMode mode) {
  return total_variation(to_scalar(z), mode);
}

ScalarField curvature(const ScalarField& f, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("curvature: eps must be > 0");
  DualField g = gradient(f);
  for (size_t k = 0; k < g.px.size(); ++k) {
    const double m = std::sqrt(g.px[k] * g.px[k] + g.py[k] * g.py[k] + eps * eps);
    g.px[k] /= m;
    g.py[k] /= m;
  }
  return divergence(g);
}

double dot(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s;
}

double dot(const DualField& a, const DualField& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (size_t k = 0; k < a.px.size(); ++k) s += a.px[k] * b.px[k] + a.py[k] * b.py[k];
  return s;
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / f.size();
}

}  // namespace amf
