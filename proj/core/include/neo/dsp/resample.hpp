#pragma once

#include <span>
#include <vector>

#include "neo/types.hpp"

namespace neo::dsp {

/// Rational-rate polyphase resampler (Kaiser-windowed low-pass prototype).
/// Output sample m corresponds to input time m*down/up; each polyphase
/// branch is normalized to unit DC gain so constants pass through exactly.
class PolyphaseResampler {
 public:
  PolyphaseResampler(int up, int down, int half_taps = 10,
                     double kaiser_beta = 5.0);

  /// 250 Hz -> 32 Hz conversion (up 16, down 125) used by the model path.
  static PolyphaseResampler rate_250_to_32();

  /// Whole-signal conversion, center-aligned, zero-padded edges.
  /// Input length must be a multiple of `down`; output has exactly
  /// len*up/down samples.
  std::vector<double> apply(std::span<const double> x) const;

  int up() const { return up_; }
  int down() const { return down_; }
  std::size_t taps() const { return h_.size(); }

 private:
  int up_;
  int down_;
  std::vector<double> h_;  // prototype, gain-compensated
  int center_;
};

/// 250 Hz series -> 32 Hz series; errors unless length is a multiple of 125.
std::vector<double> resample_to_32hz(std::span<const double> x);

/// Per-channel variant; fs must be 250 Hz.
Recording resample_to_32hz(const Recording& rec);

}  // namespace neo::dsp
