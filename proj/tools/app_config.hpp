#pragma once

#include <optional>
#include <string>

#include "neo/dsp/design.hpp"
#include "neo/stream/motion.hpp"
#include "neo/stream/synth.hpp"

namespace neomon {

/// Operator configuration, loadable from JSON (--config or NEOMON_CONFIG).
/// Unknown keys are rejected; referenced paths must exist at load time.
struct AppConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8355;
  std::string montage_file;  // empty = built-in reduced montage
  std::string weights;       // empty = seeded random (structural mode)
  neo::dsp::EdgeInterpretation edges =
      neo::dsp::EdgeInterpretation::fs_relative;
  double threshold = 0.5;
  neo::stream::MotionThresholds imu;
  std::string scenario = "default";
  bool zscore = true;

  static AppConfig load(const std::string& path);
  /// --config flag value, else the NEOMON_CONFIG environment variable,
  /// else defaults.
  static AppConfig resolve(const std::string& flag_path);
};

/// Named built-in scenarios plus JSON files.
neo::stream::SynthConfig load_scenario(const std::string& name_or_path);

}  // namespace neomon
