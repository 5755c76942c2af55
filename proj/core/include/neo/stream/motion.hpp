#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neo/types.hpp"

namespace neo::stream {

// MPU6050-style raw units at the default full-scale ranges.
inline constexpr double kAccelLsbPerG = 16384.0;   // +-2 g
inline constexpr double kGyroLsbPerDps = 131.0;    // +-250 deg/s

struct MotionThresholds {
  double accel_g = 0.2;       // trip when | ||accel|| - 1 g | exceeds this
  double gyro_dps = 50.0;     // or when ||gyro|| exceeds this
  double min_duration_s = 0.1;
  double quiet_s = 0.5;       // hysteresis close-out
};

enum class MotionSeverity { minor, major };

struct MotionEvent {
  std::uint64_t t_start_us = 0;
  std::uint64_t t_end_us = 0;
  double peak_accel_g = 0.0;
  double peak_gyro_dps = 0.0;
  MotionSeverity severity = MotionSeverity::minor;
};

/// Threshold detector with hysteresis over calibrated IMU samples.
/// Events are emitted once quiet_s of sub-threshold data closes them; an
/// excursion shorter than min_duration_s is discarded.
class MotionDetector {
 public:
  MotionDetector(MotionThresholds thr, double accel_lsb_per_g,
                 double gyro_lsb_per_dps);

  std::optional<MotionEvent> push(const SampleFrame& f);
  std::optional<MotionEvent> flush();  // close any open event at stream end

 private:
  MotionThresholds thr_;
  double accel_scale_;
  double gyro_scale_;

  bool active_ = false;
  std::uint64_t start_us_ = 0;
  std::uint64_t last_above_us_ = 0;
  double peak_a_ = 0.0;
  double peak_g_ = 0.0;

  std::optional<MotionEvent> close(std::uint64_t end_us);
};

std::vector<MotionEvent> detect_motion(std::span<const SampleFrame> frames,
                                       const MotionThresholds& thr,
                                       double accel_lsb_per_g = kAccelLsbPerG,
                                       double gyro_lsb_per_dps = kGyroLsbPerDps);

}  // namespace neo::stream
