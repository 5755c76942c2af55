#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "neo/epochs.hpp"
#include "neo/types.hpp"

namespace neo::stream {

enum class BrainState { eyes_open, eyes_closed, seizure };

std::string to_string(BrainState s);

struct ScenarioSegment {
  double t0_s = 0.0;
  double t1_s = 0.0;
  BrainState state = BrainState::eyes_open;
};

struct MotionBurst {
  double t0_s = 0.0;
  double dur_s = 0.3;
  double accel_g = 0.5;   // peak beyond 1 g rest
  double gyro_dps = 80.0; // peak rotation rate
};

/// Synthetic signal recipe. Everything is deterministic under `seed`.
struct SynthConfig {
  double duration_s = 60.0;
  std::uint64_t seed = 1;

  double background_uv = 20.0;  // 1/f background scale (RMS-ish)
  double noise_uv = 2.0;        // white sensor noise sigma
  double line_uv = 5.0;         // 50 Hz powerline amplitude
  double alpha_uv = 30.0;       // eyes-closed 8-13 Hz burst amplitude
  double seizure_uv = 150.0;    // 3 Hz spike-wave amplitude
  double blink_uv = 0.0;        // eye-blink transient amplitude (0 = off)
  double blink_rate_hz = 0.15;  // Poisson arrival rate when blinks enabled

  std::vector<ScenarioSegment> segments;  // empty = all eyes_open
  std::vector<MotionBurst> motion;

  double vref_v = 4.5;
  double gain = 24.0;
};

/// Streaming synthetic acquisition device: 250 Hz frames of 8 referential
/// EEG channels (vs Cz) plus IMU, with ground-truth annotations from the
/// scenario segments. Fixed seed gives bit-identical output.
class SyntheticDevice {
 public:
  explicit SyntheticDevice(SynthConfig cfg);

  SampleFrame next_frame();
  std::vector<SampleFrame> frames(std::size_t n);

  /// Microvolt rendering of the same signals (skips ADC quantization);
  /// advances the same clock as next_frame, so use a fresh instance.
  Recording render_recording();

  std::vector<AnnotationSpan> annotations() const;
  const SynthConfig& config() const { return cfg_; }

 private:
  BrainState state_at(double t) const;
  void sample_uv(double t, double* out8);
  void sample_imu(double t, std::array<std::int16_t, 3>& accel,
                  std::array<std::int16_t, 3>& gyro);

  SynthConfig cfg_;
  std::mt19937_64 rng_;
  std::uint32_t seq_ = 0;

  // per-channel pink noise state (Kellet economy filter)
  struct Pink {
    double b0 = 0, b1 = 0, b2 = 0;
  };
  std::array<Pink, kAdcChannels> pink_{};
  std::array<double, kAdcChannels> line_gain_{};
  std::array<double, kAdcChannels> seizure_gain_{};
  double alpha_phase_ = 0.0;
  double line_phase_ = 0.0;
  std::vector<double> blink_times_;
  double blink_len_s_ = 0.35;
};

}  // namespace neo::stream
