#pragma once

#include <vector>

#include "neo/artifact/ica.hpp"
#include "neo/dsp/welch.hpp"
#include "neo/montage.hpp"
#include "neo/types.hpp"

namespace neo::ica {

inline constexpr int kTopomapGrid = 32;

/// The three representations an IC classifier consumes: the activation
/// waveform, a scalp interpolation of the mixing column, and its PSD,
/// plus summary scalars for the rule-based baseline.
struct ComponentFeatures {
  std::vector<double> waveform;  // component activation over the window
  MatrixRM topomap;              // kTopomapGrid^2 inverse-distance map, 0 off-disc
  dsp::Spectrum psd;

  double kurtosis_excess = 0.0;
  double low_band_ratio = 0.0;   // 0.5-4 Hz power / total
  double line_band_ratio = 0.0;  // 48-52 Hz power / total
  double frontal_dominance = 0.0;  // |Fp1|+|Fp2| share of the mixing column
};

/// Scalp map of arbitrary per-electrode weights (inverse-distance
/// interpolation on a unit-disc grid; cells outside the disc are zero).
MatrixRM interpolate_topomap(const ElectrodeSet& electrodes,
                             const std::vector<std::string>& labels,
                             const Eigen::VectorXd& weights,
                             int grid = kTopomapGrid);

ComponentFeatures extract_features(const IcaModel& model,
                                   const Eigen::MatrixXd& activations,
                                   int component,
                                   const MontageGraph& montage, double fs_hz);

double excess_kurtosis(std::span<const double> x);

}  // namespace neo::ica
