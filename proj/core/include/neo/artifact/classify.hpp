#pragma once

#include <memory>
#include <string>
#include <vector>

#include "neo/artifact/features.hpp"
#include "neo/detector/weights.hpp"

namespace neo::ica {

enum class ComponentClass { non_artifactual, artifactual };

struct ComponentLabel {
  ComponentClass label = ComponentClass::non_artifactual;
  double confidence = 0.5;
  std::string rationale;
};

/// Pluggable component classifier. The baseline is rule-based; model-backed
/// classifiers load their parameters from a weight container behind the
/// same interface.
class ComponentClassifier {
 public:
  virtual ~ComponentClassifier() = default;
  virtual ComponentLabel classify(const ComponentFeatures& f) const = 0;
};

/// Heuristic baseline. A component is artifactual when any rule fires:
///   blink/movement: excess kurtosis > 8 with frontal-dominant topography
///   ocular drift:   low-band ratio > 0.7 with frontal dominance
///   line noise:     line-band ratio > 0.5
struct BaselineRules {
  double kurtosis = 8.0;
  double low_band = 0.7;
  double line_band = 0.5;
  double frontal = 0.45;
};

class RuleBasedClassifier : public ComponentClassifier {
 public:
  explicit RuleBasedClassifier(BaselineRules rules = {}) : rules_(rules) {}
  ComponentLabel classify(const ComponentFeatures& f) const override;

 private:
  BaselineRules rules_;
};

/// Logistic classifier over the scalar features [kurtosis/10, low_band,
/// line_band, frontal], loaded from container tensors "classifier/w" (4)
/// and "classifier/b" (1).
class LinearClassifier : public ComponentClassifier {
 public:
  static LinearClassifier from_container(const detect::WeightContainer& wc);
  ComponentLabel classify(const ComponentFeatures& f) const override;

 private:
  std::array<double, 4> w_{};
  double b_ = 0.0;
};

/// Zeroes the activation rows labeled artifactual and reconstructs.
/// With no artifactual labels the output equals the input (within float
/// round-off); removal never increases total signal energy.
Eigen::MatrixXd remove_artifacts(const Eigen::MatrixXd& x,
                                 const std::vector<ComponentLabel>& labels,
                                 const IcaModel& model);

}  // namespace neo::ica
