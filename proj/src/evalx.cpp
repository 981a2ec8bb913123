#include "amf/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amf {

double dice(const LabelField& a, const LabelField& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("dice: dimension mismatch");
  int na = 0, nb = 0, inter = 0;
  for (size_t k = 0; k < a.labels.size(); ++k) {
    na += a.labels[k];
    nb += b.labels[k];
    inter += a.labels[k] & b.labels[k];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * inter / (na + nb);
}

double multi_label_dice(const std::vector<double>& per_object_scores) {
  if (per_object_scores.empty())
    throw std::invalid_argument("multi_label_dice: empty score list");
  double s = 0.0;
  for (double d : per_object_scores) s += d;
  return s / per_object_scores.size();
}

std::vector<double> simplex_project(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("simplex_project: empty vector");
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) tau = t;
  }
  std::vector<double> out(v.size());
  for (size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - tau, 0.0);
  return out;
}

std::vector<ProbabilityField> one_vs_rest(const ClassProbStack& prob_maps,
                                          const AmfParams& params) {
  if (prob_maps.k() < 2) throw std::invalid_argument("one_vs_rest: need >= 2 classes");
  std::vector<ProbabilityField> out;
  out.reserve(prob_maps.classes.size());
  for (const auto& p : prob_maps.classes)
    out.push_back(amf_solve(psi_from_probability(p), params));
  return out;
}

QuasiMultiLabel quasi_multilabel(const std::vector<ProbabilityField>& thetas) {
  if (thetas.size() < 2) throw std::invalid_argument("quasi_multilabel: need >= 2 classes");
  const int w = thetas.front().width, h = thetas.front().height;
  for (const auto& t : thetas)
    if (t.width != w || t.height != h)
      throw std::invalid_argument("quasi_multilabel: dimension mismatch");

  QuasiMultiLabel out;
  out.width = w;
  out.height = h;
  out.probs.width = w;
  out.probs.height = h;
  out.probs.classes.assign(thetas.size(), ProbabilityField(w, h));
  out.class_map.assign(static_cast<size_t>(w) * h, 0);

  std::vector<double> vec(thetas.size());
  for (size_t px = 0; px < static_cast<size_t>(w) * h; ++px) {
    for (size_t c = 0; c < thetas.size(); ++c) vec[c] = thetas[c].theta[px];
    const std::vector<double> proj = simplex_project(vec);
    int arg = 0;
    for (size_t c = 0; c < proj.size(); ++c) {
      out.probs.classes[c].theta[px] = proj[c];
      if (proj[c] > proj[arg]) arg = static_cast<int>(c);
    }
    out.class_map[px] = arg;
  }
  return out;
}

QArea q_area(const LabelField& z, const ProbabilityField& theta) {
  if (z.width != theta.width || z.height != theta.height)
    throw std::invalid_argument("q_area: dimension mismatch");
  const ClampRange clamp;
  double fg_sum = 0.0, bg_sum = 0.0;
  int fg_n = 0, bg_n = 0;
  for (size_t k = 0; k < z.labels.size(); ++k) {
    const double th = std::clamp(theta.theta[k], clamp.lo, clamp.hi);
    if (z.labels[k]) {
      fg_sum += std::log(th);
      ++fg_n;
    } else {
      bg_sum += std::log(1.0 - th);
      ++bg_n;
    }
  }
  QArea out;
  out.foreground_empty = fg_n == 0;
  out.background_empty = bg_n == 0;
  double e = 0.0;
  if (fg_n > 0) e += fg_sum / fg_n;
  if (bg_n > 0) e += bg_sum / bg_n;
  out.value = std::exp(e);
  return out;
}

}  // namespace amf
