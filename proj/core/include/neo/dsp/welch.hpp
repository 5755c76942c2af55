#pragma once

#include <span>
#include <vector>

namespace neo::dsp {

enum class SpectrumMethod { periodogram, welch };

/// One-sided power spectral density, power in uV^2/Hz.
struct Spectrum {
  std::vector<double> freqs_hz;
  std::vector<double> power;
  SpectrumMethod method = SpectrumMethod::welch;

  double df() const {
    return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0;
  }
  /// Integrated power over [lo_hz, hi_hz] (rectangle rule over bins).
  double band_power(double lo_hz, double hi_hz) const;
  double total_power() const;
};

/// Welch-averaged PSD: Hann window, mean removal per segment, one-sided
/// scaling. seg_len == 0 picks 2 s (or the whole signal when shorter);
/// overlap is the fraction of seg_len shared by successive segments.
Spectrum welch_psd(std::span<const double> x, double fs_hz, int seg_len = 0,
                   double overlap = 0.5);

}  // namespace neo::dsp
