#pragma once

#include "amf/amf.hpp"
#include "amf/field.hpp"

#include <vector>

namespace amf {

/// Per-class probability fields with shared dimensions.
struct ClassProbStack {
  int width = 0;
  int height = 0;
  std::vector<ProbabilityField> classes;

  int k() const { return static_cast<int>(classes.size()); }
};

/// 2 |A ∩ B| / (|A| + |B|); two empty sets count as perfect agreement.
double dice(const LabelField& a, const LabelField& b);

/// Mean of per-object Dice scores for one image.
double multi_label_dice(const std::vector<double>& per_object_scores);

/// Euclidean projection onto {x >= 0, sum x = 1} (sort-and-threshold).
std::vector<double> simplex_project(const std::vector<double>& v);

/// One mean-field solve per class on the logit of its probability map.
std::vector<ProbabilityField> one_vs_rest(const ClassProbStack& prob_maps,
                                          const AmfParams& params);

struct QuasiMultiLabel {
  ClassProbStack probs;        // simplex-projected per pixel
  std::vector<int> class_map;  // per-pixel argmax, ties to the lowest index
  int width = 0, height = 0;
};

QuasiMultiLabel quasi_multilabel(const std::vector<ProbabilityField>& thetas);

struct QArea {
  double value = 0.0;
  bool foreground_empty = false;
  bool background_empty = false;
};

/// Area-normalized Q mass of a labeling:
/// exp( mean_F ln theta + mean_B ln(1-theta) ), theta clamped. An empty
/// class drops its term and is flagged.
QArea q_area(const LabelField& z, const ProbabilityField& theta);

}  // namespace amf
