#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neo/dsp/welch.hpp"
#include "neo/epochs.hpp"
#include "neo/types.hpp"

namespace neo::analysis {

struct CorrelationResult {
  double r = 0.0;
  double lag_s = 0.0;
};

/// Lag maximizing the cross-correlation within +-max_lag_s, then Pearson r
/// at that lag. Throws NumericError on zero-variance input.
CorrelationResult aligned_correlation(std::span<const double> a,
                                      std::span<const double> b, double fs_hz,
                                      double max_lag_s);

/// 50 Hz powerline treated as the noise source inside the 2-90 Hz band:
/// 10*log10(P(2-90 minus 48-52) / P(48-52)). Returns +inf (flagged by the
/// caller) when the noise band carries no power. Requires fs >= 200.
double snr_powerline_db(std::span<const double> x, double fs_hz);

/// Alpha band as the signal inside 2-30 Hz:
/// 10*log10(P(8-13) / (P(2-30) - P(8-13))). Requires fs >= 64.
double snr_alpha_db(std::span<const double> x, double fs_hz);

struct StateCorrelation {
  std::string state;
  int n_segments = 0;
  int n_values = 0;     // segment x channel samples
  double mean_r = 0.0;
  double ci_lo = 0.0;   // 95% bootstrap
  double ci_hi = 0.0;
};

struct SnrSummary {
  double mean_over_all = 0.0;       // every (segment, channel) value
  double mean_over_channels = 0.0;  // channel means averaged
  double mean_over_segments = 0.0;  // segment means averaged
};

struct DeviceQuality {
  std::string device;
  SnrSummary snr_powerline;
  SnrSummary snr_alpha;
};

struct StateSpectrum {
  std::string state;
  dsp::Spectrum device_a;
  dsp::Spectrum device_b;
};

struct QualityReport {
  std::vector<StateCorrelation> correlations;
  std::vector<DeviceQuality> devices;  // [0] = a, [1] = b
  std::vector<StateSpectrum> spectra;
  std::vector<std::string> notices;    // states skipped, +inf flags
};

struct ReportConfig {
  double max_lag_s = 0.5;
  int bootstrap = 1000;
  std::uint64_t seed = 7;
  bool prefilter_2_30 = true;  // Chebyshev-II 2-30 Hz before correlation
};

/// Cross-device signal-quality report over labeled state segments.
QualityReport state_report(const Recording& dev_a, const Recording& dev_b,
                           std::span<const AnnotationSpan> states,
                           const ReportConfig& cfg = {});

std::string render_report(const QualityReport& report);

}  // namespace neo::analysis
