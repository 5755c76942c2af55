#include "neo/stream/motion.hpp"

#include <cmath>

namespace neo::stream {

MotionDetector::MotionDetector(MotionThresholds thr, double accel_lsb_per_g,
                               double gyro_lsb_per_dps)
    : thr_(thr),
      accel_scale_(1.0 / accel_lsb_per_g),
      gyro_scale_(1.0 / gyro_lsb_per_dps) {}

std::optional<MotionEvent> MotionDetector::close(std::uint64_t end_us) {
  active_ = false;
  const double dur_s =
      static_cast<double>(end_us - start_us_) / 1e6;
  if (dur_s < thr_.min_duration_s) return std::nullopt;
  MotionEvent ev;
  ev.t_start_us = start_us_;
  ev.t_end_us = end_us;
  ev.peak_accel_g = peak_a_;
  ev.peak_gyro_dps = peak_g_;
  const bool major = peak_a_ >= 2.0 * thr_.accel_g ||
                     peak_g_ >= 2.0 * thr_.gyro_dps;
  ev.severity = major ? MotionSeverity::major : MotionSeverity::minor;
  return ev;
}

std::optional<MotionEvent> MotionDetector::push(const SampleFrame& f) {
  const double ax = f.accel[0] * accel_scale_;
  const double ay = f.accel[1] * accel_scale_;
  const double az = f.accel[2] * accel_scale_;
  const double gx = f.gyro[0] * gyro_scale_;
  const double gy = f.gyro[1] * gyro_scale_;
  const double gz = f.gyro[2] * gyro_scale_;

  const double a_dev = std::abs(std::sqrt(ax * ax + ay * ay + az * az) - 1.0);
  const double g_mag = std::sqrt(gx * gx + gy * gy + gz * gz);
  const bool above = a_dev > thr_.accel_g || g_mag > thr_.gyro_dps;

  if (above) {
    if (!active_) {
      active_ = true;
      start_us_ = f.t_us;
      peak_a_ = 0.0;
      peak_g_ = 0.0;
    }
    last_above_us_ = f.t_us;
    peak_a_ = std::max(peak_a_, a_dev);
    peak_g_ = std::max(peak_g_, g_mag);
    return std::nullopt;
  }

  if (active_ &&
      static_cast<double>(f.t_us - last_above_us_) / 1e6 >= thr_.quiet_s)
    return close(last_above_us_);
  return std::nullopt;
}

std::optional<MotionEvent> MotionDetector::flush() {
  if (!active_) return std::nullopt;
  return close(last_above_us_);
}

std::vector<MotionEvent> detect_motion(std::span<const SampleFrame> frames,
                                       const MotionThresholds& thr,
                                       double accel_lsb_per_g,
                                       double gyro_lsb_per_dps) {
  MotionDetector det(thr, accel_lsb_per_g, gyro_lsb_per_dps);
  std::vector<MotionEvent> events;
  for (const auto& f : frames) {
    if (auto ev = det.push(f)) events.push_back(*ev);
  }
  if (auto ev = det.flush()) events.push_back(*ev);
  return events;
}

}  // namespace neo::stream
