#include "neo/dsp/welch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neo/dsp/fft.hpp"
#include "neo/errors.hpp"

namespace neo::dsp {

double Spectrum::band_power(double lo_hz, double hi_hz) const {
  const double step = df();
  if (step <= 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    if (freqs_hz[i] >= lo_hz && freqs_hz[i] < hi_hz) acc += power[i] * step;
  }
  return acc;
}

double Spectrum::total_power() const {
  const double step = df();
  double acc = 0.0;
  for (double p : power) acc += p * step;
  return acc;
}

Spectrum welch_psd(std::span<const double> x, double fs_hz, int seg_len,
                   double overlap) {
  if (x.empty()) throw NumericError("welch: empty input");
  if (fs_hz <= 0) throw NumericError("welch: fs must be > 0");
  if (seg_len == 0)
    seg_len = std::min<int>(static_cast<int>(x.size()),
                            static_cast<int>(std::lround(2.0 * fs_hz)));
  if (seg_len <= 1 || static_cast<std::size_t>(seg_len) > x.size())
    throw NumericError("welch: segment length must be in [2, len(x)]");
  overlap = std::clamp(overlap, 0.0, 0.95);

  const int n = seg_len;
  const int hop = std::max(1, static_cast<int>(std::lround(n * (1.0 - overlap))));

  // periodic Hann
  std::vector<double> win(static_cast<std::size_t>(n));
  double u = 0.0;
  for (int i = 0; i < n; ++i) {
    win[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    u += win[static_cast<std::size_t>(i)] * win[static_cast<std::size_t>(i)];
  }

  const int n_bins = n / 2 + 1;
  std::vector<double> acc(static_cast<std::size_t>(n_bins), 0.0);
  int n_segs = 0;

  std::vector<double> seg(static_cast<std::size_t>(n));
  for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= x.size();
       start += static_cast<std::size_t>(hop)) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += x[start + static_cast<std::size_t>(i)];
    mean /= n;
    for (int i = 0; i < n; ++i)
      seg[static_cast<std::size_t>(i)] =
          (x[start + static_cast<std::size_t>(i)] - mean) *
          win[static_cast<std::size_t>(i)];

    auto spec = fft_real(seg);
    for (int k = 0; k < n_bins; ++k) {
      const double mag2 = std::norm(spec[static_cast<std::size_t>(k)]);
      double scale = 1.0 / (fs_hz * u);
      if (k != 0 && !(n % 2 == 0 && k == n / 2)) scale *= 2.0;  // one-sided
      acc[static_cast<std::size_t>(k)] += mag2 * scale;
    }
    ++n_segs;
  }

  Spectrum s;
  s.method = n_segs > 1 ? SpectrumMethod::welch : SpectrumMethod::periodogram;
  s.freqs_hz.resize(static_cast<std::size_t>(n_bins));
  s.power.resize(static_cast<std::size_t>(n_bins));
  for (int k = 0; k < n_bins; ++k) {
    s.freqs_hz[static_cast<std::size_t>(k)] = fs_hz * k / n;
    s.power[static_cast<std::size_t>(k)] =
        acc[static_cast<std::size_t>(k)] / n_segs;
  }
  return s;
}

}  // namespace neo::dsp
