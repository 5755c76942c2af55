#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "neo/types.hpp"

namespace neo {

/// Half-open labeled time span, seconds from session start.
struct AnnotationSpan {
  double t0_s = 0.0;
  double t1_s = 0.0;
  std::string label;
};

/// Per-second binary seizure mask (the annotation grid). Sub-second span
/// endpoints are floored onto the grid.
using SecondMask = std::vector<bool>;

SecondMask mask_from_spans(std::span<const AnnotationSpan> spans,
                           double duration_s,
                           const std::string& positive_label = "seizure");

/// Seconds of seizure activity inside window [start_s, start_s + 12).
double seizure_seconds_in_window(const SecondMask& mask, int start_s,
                                 int window_s = 12);

enum class SegmentMode { train, stream };

struct SegmentConfig {
  SegmentMode mode = SegmentMode::stream;
  double stream_hop_s = 1.0;
};

/// Cuts a 12-channel 32 Hz recording into labeled 12 s epochs.
///
/// Train mode advances 1 s after a seizure-labeled window and 2 s otherwise
/// (11 s / 10 s overlap); stream mode advances by the configured hop.
/// A recording shorter than 12 s yields an empty sequence.
std::vector<std::pair<Epoch, EpochLabel>> segment_epochs(
    const Recording& rec32, const SecondMask& mask, const SegmentConfig& cfg);

/// Epoch start times (seconds) produced by segment_epochs for a mask of
/// `duration_s` seconds; exposed so callers can enumerate windows without
/// materializing epochs.
std::vector<int> window_starts(const SecondMask& mask, int duration_s,
                               const SegmentConfig& cfg);

struct EpochScore {
  double t_start_s = 0.0;
  double prob = 0.0;
};

struct SeizureEvent {
  double t_start_s = 0.0;  // start of the epoch that completed persistence
  double mean_prob = 0.0;
  int n_epochs = 0;
};

/// Declares seizure events from a sequence of per-epoch probabilities.
///
/// An event fires once epochs above `threshold`, contiguous at `hop_s`
/// spacing, cover at least `persistence_s` of stream time (k*hop >= 5 s);
/// the event start is the epoch that completed the run. Runs are closed by
/// a sub-threshold epoch or a timing gap.
std::vector<SeizureEvent> detection_decision(std::span<const EpochScore> probs,
                                             double threshold = 0.5,
                                             double hop_s = 1.0,
                                             double persistence_s = 5.0);

/// Incremental form of detection_decision for live streams.
class SeizureEventDetector {
 public:
  SeizureEventDetector(double threshold = 0.5, double hop_s = 1.0,
                       double persistence_s = 5.0)
      : threshold_(threshold), hop_s_(hop_s), persistence_s_(persistence_s) {}

  std::optional<SeizureEvent> push(const EpochScore& s);
  void reset();

 private:
  double threshold_;
  double hop_s_;
  double persistence_s_;
  int run_len_ = 0;
  double run_prob_sum_ = 0.0;
  double last_t_ = 0.0;
  bool fired_ = false;  // one event per run
};

}  // namespace neo
