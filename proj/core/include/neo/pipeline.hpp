#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "neo/adc.hpp"
#include "neo/detector/gradcam.hpp"
#include "neo/detector/model.hpp"
#include "neo/dsp/biquad.hpp"
#include "neo/dsp/design.hpp"
#include "neo/epochs.hpp"
#include "neo/montage.hpp"
#include "neo/stream/motion.hpp"
#include "neo/types.hpp"

namespace neo {

/// Probability backend for the live pipeline.
enum class DetectorKind {
  model,             // CNN-GAT forward (+ relevance)
  bandpower_fixture  // 3 Hz band-power threshold; a test oracle, not a
                     // clinical detector
};

struct PipelineConfig {
  double threshold = 0.5;
  double hop_s = 1.0;
  DetectorKind detector = DetectorKind::model;
  dsp::EdgeInterpretation edges = dsp::EdgeInterpretation::fs_relative;
  stream::MotionThresholds motion;
  double vref_v = kDefaultVrefV;
  double gain = kDefaultGain;
  bool zscore = true;  // used by the fixture path; model path follows config
};

struct EpochReport {
  double t_start_s = 0.0;
  double probability = 0.0;
  std::vector<int> top_channels;
  double process_ms = 0.0;
};

/// Streaming stage chain: ADC counts -> microvolts -> acquisition filters ->
/// 12 s window -> bipolar derivation -> model preprocessing -> probability
/// (+ relevance) -> persistence rule. Push frames, receive callbacks.
class StreamPipeline {
 public:
  StreamPipeline(const MontageGraph& montage,
                 std::shared_ptr<const detect::WeightContainer> weights,
                 PipelineConfig cfg);

  void push(const SampleFrame& frame);

  std::function<void(const EpochReport&)> on_epoch;
  std::function<void(const SeizureEvent&)> on_seizure;
  std::function<void(const stream::MotionEvent&)> on_motion;

  std::uint64_t frames_seen() const { return frames_seen_; }

 private:
  void run_hop();
  double fixture_probability(const MatrixRM& window12) const;

  MontageGraph montage_;
  PipelineConfig cfg_;
  std::optional<detect::CnnGatModel> model_;
  dsp::BiquadFilter acq_filter_;
  stream::MotionDetector motion_;
  SeizureEventDetector event_detector_;

  MatrixRM ring_;  // 8 x 3000 circular window of filtered microvolts
  Eigen::Index write_pos_ = 0;
  std::uint64_t frames_seen_ = 0;
  int hop_samples_ = 250;
  int since_hop_ = 0;
  std::uint64_t window_end_us_ = 0;
};

}  // namespace neo
