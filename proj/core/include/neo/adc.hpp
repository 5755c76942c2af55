#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace neo {

inline constexpr std::int32_t kAdcMin = -(1 << 23);
inline constexpr std::int32_t kAdcMax = (1 << 23) - 1;
inline constexpr double kDefaultVrefV = 4.5;
inline constexpr double kDefaultGain = 24.0;

/// Full-scale input span in volts: 2*vref/gain (0.375 V at vref 4.5, gain 24).
inline double adc_span_v(double vref_v = kDefaultVrefV,
                         double gain = kDefaultGain) {
  return 2.0 * vref_v / gain;
}

/// One LSB in microvolts.
inline double adc_lsb_uv(double vref_v = kDefaultVrefV,
                         double gain = kDefaultGain) {
  return adc_span_v(vref_v, gain) / 16777216.0 * 1e6;
}

/// count * (2*vref/gain) / 2^24, expressed in microvolts.
inline double adc_to_microvolts(std::int32_t count,
                                double vref_v = kDefaultVrefV,
                                double gain = kDefaultGain) {
  return static_cast<double>(count) * adc_lsb_uv(vref_v, gain);
}

/// Inverse mapping used by the device simulator; saturates at the rails.
inline std::int32_t microvolts_to_adc(double uv,
                                      double vref_v = kDefaultVrefV,
                                      double gain = kDefaultGain) {
  const double counts = std::round(uv / adc_lsb_uv(vref_v, gain));
  const double clamped =
      std::clamp(counts, static_cast<double>(kAdcMin),
                 static_cast<double>(kAdcMax));
  return static_cast<std::int32_t>(clamped);
}

}  // namespace neo
