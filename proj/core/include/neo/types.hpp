#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neo/errors.hpp"

namespace neo {

// Row-major so each channel is contiguous in memory (rows = channels).
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kAdcChannels = 8;
inline constexpr double kDeviceRateHz = 250.0;
inline constexpr double kModelRateHz = 32.0;
inline constexpr double kEpochSeconds = 12.0;
inline constexpr int kEpochSamples = 384;  // 12 s at 32 Hz
inline constexpr int kMontageChannels = 12;
inline constexpr std::uint64_t kFrameIntervalUs = 4000;  // 250 Hz

/// One 250 Hz acquisition instant: 8 ADC counts plus raw IMU readings.
struct SampleFrame {
  std::uint32_t seq = 0;
  std::uint64_t t_us = 0;
  std::array<std::int32_t, kAdcChannels> adc{};  // signed 24-bit counts
  std::array<std::int16_t, 3> accel{};
  std::array<std::int16_t, 3> gyro{};

  bool operator==(const SampleFrame&) const = default;
};

struct SessionMeta {
  std::string device_id = "sim-000";
  std::string started_at;  // informational, ISO-8601
  std::string montage = "reduced-9";
  double gain = 24.0;
  double vref_v = 4.5;
};

/// Multichannel time series in microvolts, rows = channels.
struct Recording {
  double fs_hz = 0.0;
  std::vector<std::string> channels;
  MatrixRM data;
  SessionMeta meta;

  Eigen::Index n_channels() const { return data.rows(); }
  Eigen::Index n_samples() const { return data.cols(); }
  double duration_s() const {
    return fs_hz > 0 ? static_cast<double>(n_samples()) / fs_hz : 0.0;
  }

  void validate() const {
    if (fs_hz <= 0) throw NumericError("recording: fs_hz must be > 0");
    if (static_cast<std::size_t>(data.rows()) != channels.size())
      throw NumericError("recording: data rows (" +
                         std::to_string(data.rows()) +
                         ") != channel labels (" +
                         std::to_string(channels.size()) + ")");
    if (!data.allFinite())
      throw NumericError("recording: non-finite sample");
  }
};

/// 12 x 384 model-input window (microvolts at 32 Hz, 12 s).
struct Epoch {
  MatrixRM data;  // kMontageChannels x kEpochSamples
  std::uint64_t t_start_us = 0;

  void validate() const {
    if (data.rows() != kMontageChannels || data.cols() != kEpochSamples)
      throw NumericError("epoch: shape must be 12x384, got " +
                         std::to_string(data.rows()) + "x" +
                         std::to_string(data.cols()));
    if (!data.allFinite()) throw NumericError("epoch: non-finite value");
  }
};

enum class SeizureClass { non_seizure, seizure };

struct EpochLabel {
  SeizureClass label = SeizureClass::non_seizure;
  double seizure_seconds = 0.0;
};

/// Label rule: an epoch is seizure iff it contains >= 1 s of annotated
/// seizure activity (cumulative over the window).
inline constexpr double kSeizureLabelSeconds = 1.0;

inline EpochLabel make_epoch_label(double seizure_seconds) {
  EpochLabel l;
  l.seizure_seconds = seizure_seconds;
  l.label = seizure_seconds >= kSeizureLabelSeconds ? SeizureClass::seizure
                                                    : SeizureClass::non_seizure;
  return l;
}

}  // namespace neo
