#include "neo/artifact/classify.hpp"

#include <algorithm>
#include <cmath>

#include "neo/errors.hpp"

namespace neo::ica {

namespace {

double margin_confidence(double value, double threshold) {
  // map the rule margin into [0.5, 1]
  const double m = (value - threshold) / std::max(threshold, 1e-12);
  return std::clamp(0.5 + 0.5 * m, 0.5, 1.0);
}

}  // namespace

ComponentLabel RuleBasedClassifier::classify(const ComponentFeatures& f) const {
  const bool frontal = f.frontal_dominance > rules_.frontal;

  double best_conf = 0.0;
  std::string why;
  if (f.kurtosis_excess > rules_.kurtosis && frontal) {
    best_conf = margin_confidence(f.kurtosis_excess, rules_.kurtosis);
    why = "blink/movement: kurtosis " + std::to_string(f.kurtosis_excess) +
          " with frontal topography";
  }
  if (f.low_band_ratio > rules_.low_band && frontal) {
    const double c = margin_confidence(f.low_band_ratio, rules_.low_band);
    if (c > best_conf) {
      best_conf = c;
      why = "ocular drift: low-band ratio " + std::to_string(f.low_band_ratio);
    }
  }
  if (f.line_band_ratio > rules_.line_band) {
    const double c = margin_confidence(f.line_band_ratio, rules_.line_band);
    if (c > best_conf) {
      best_conf = c;
      why = "line noise: 48-52 Hz ratio " + std::to_string(f.line_band_ratio);
    }
  }

  ComponentLabel out;
  if (best_conf > 0.0) {
    out.label = ComponentClass::artifactual;
    out.confidence = best_conf;
    out.rationale = why;
  } else {
    // proximity of the nearest rule, mapped away from 1
    double near = 0.0;
    near = std::max(near, f.kurtosis_excess / rules_.kurtosis);
    near = std::max(near, f.low_band_ratio / rules_.low_band * (frontal ? 1.0 : 0.5));
    near = std::max(near, f.line_band_ratio / rules_.line_band);
    out.label = ComponentClass::non_artifactual;
    out.confidence = std::clamp(1.0 - 0.5 * std::min(near, 1.0), 0.5, 1.0);
    out.rationale = "no rule fired";
  }
  return out;
}

LinearClassifier LinearClassifier::from_container(
    const detect::WeightContainer& wc) {
  LinearClassifier c;
  const auto w = wc.tensor("classifier/w");
  const auto b = wc.tensor("classifier/b");
  if (w.size() != 4 || b.size() != 1)
    throw NumericError("linear classifier: expected classifier/w[4] and "
                       "classifier/b[1]");
  for (int i = 0; i < 4; ++i) c.w_[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)];
  c.b_ = b[0];
  return c;
}

ComponentLabel LinearClassifier::classify(const ComponentFeatures& f) const {
  const double z = w_[0] * (f.kurtosis_excess / 10.0) +
                   w_[1] * f.low_band_ratio + w_[2] * f.line_band_ratio +
                   w_[3] * f.frontal_dominance + b_;
  const double p = 1.0 / (1.0 + std::exp(-z));
  ComponentLabel out;
  out.label = p > 0.5 ? ComponentClass::artifactual
                      : ComponentClass::non_artifactual;
  out.confidence = p > 0.5 ? p : 1.0 - p;
  out.rationale = "model score " + std::to_string(p);
  return out;
}

Eigen::MatrixXd remove_artifacts(const Eigen::MatrixXd& x,
                                 const std::vector<ComponentLabel>& labels,
                                 const IcaModel& model) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw NumericError("remove_artifacts: one label per component required");
  Eigen::MatrixXd s = transform(model, x);
  for (Eigen::Index c = 0; c < s.rows(); ++c) {
    if (labels[static_cast<std::size_t>(c)].label ==
        ComponentClass::artifactual)
      s.row(c).setZero();
  }
  return inverse_transform(model, s);
}

}  // namespace neo::ica
