#include "neo/artifact/features.hpp"

#include <cmath>

#include "neo/errors.hpp"

namespace neo::ica {

double excess_kurtosis(std::span<const double> x) {
  if (x.size() < 4) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  if (m2 <= 0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

MatrixRM interpolate_topomap(const ElectrodeSet& electrodes,
                             const std::vector<std::string>& labels,
                             const Eigen::VectorXd& weights, int grid) {
  if (static_cast<std::size_t>(weights.size()) != labels.size())
    throw NumericError("topomap: weight/label count mismatch");
  MatrixRM map = MatrixRM::Zero(grid, grid);
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      const double x = -1.0 + 2.0 * (gx + 0.5) / grid;
      const double y = 1.0 - 2.0 * (gy + 0.5) / grid;
      if (x * x + y * y > 1.0) continue;
      double num = 0.0, den = 0.0;
      for (std::size_t e = 0; e < labels.size(); ++e) {
        const auto [ex, ey] = electrodes.position(labels[e]);
        const double d2 =
            (x - ex) * (x - ex) + (y - ey) * (y - ey) + 1e-6;
        const double w = 1.0 / d2;
        num += w * weights(static_cast<Eigen::Index>(e));
        den += w;
      }
      map(gy, gx) = num / den;
    }
  }
  return map;
}

ComponentFeatures extract_features(const IcaModel& model,
                                   const Eigen::MatrixXd& activations,
                                   int component, const MontageGraph& montage,
                                   double fs_hz) {
  if (component < 0 || component >= activations.rows())
    throw NumericError("extract_features: component index out of range");

  ComponentFeatures f;
  const auto n = activations.cols();
  f.waveform.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    f.waveform[static_cast<std::size_t>(i)] = activations(component, i);

  // scalp pattern: the component's mixing column over the recorded
  // electrodes, with the reference site pinned at zero
  const Eigen::MatrixXd mix = model.mixing();
  const auto& raw_order = montage.raw_channels();
  const auto& es = montage.electrodes();

  std::vector<std::string> labels = raw_order;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(raw_order.size()) + 1);
  for (std::size_t i = 0; i < raw_order.size(); ++i)
    weights(static_cast<Eigen::Index>(i)) =
        mix(static_cast<Eigen::Index>(i), component);
  labels.push_back(montage.reference());
  weights(weights.size() - 1) = 0.0;
  f.topomap = interpolate_topomap(es, labels, weights);

  f.psd = dsp::welch_psd(f.waveform, fs_hz);
  f.kurtosis_excess = excess_kurtosis(f.waveform);

  const double total = f.psd.band_power(0.5, fs_hz / 2.0);
  if (total > 0) {
    f.low_band_ratio = f.psd.band_power(0.5, 4.0) / total;
    f.line_band_ratio = f.psd.band_power(48.0, 52.0) / total;
  }

  double abs_sum = 0.0, frontal = 0.0;
  for (std::size_t i = 0; i < raw_order.size(); ++i) {
    const double a = std::abs(weights(static_cast<Eigen::Index>(i)));
    abs_sum += a;
    if (raw_order[i] == "Fp1" || raw_order[i] == "Fp2") frontal += a;
  }
  f.frontal_dominance = abs_sum > 0 ? frontal / abs_sum : 0.0;
  return f;
}

}  // namespace neo::ica
