#include "neo/epochs.hpp"

#include <algorithm>
#include <cmath>

namespace neo {

SecondMask mask_from_spans(std::span<const AnnotationSpan> spans,
                           double duration_s,
                           const std::string& positive_label) {
  const int n = static_cast<int>(std::floor(duration_s));
  SecondMask mask(static_cast<std::size_t>(std::max(0, n)), false);
  for (const auto& s : spans) {
    if (s.label != positive_label) continue;
    const int a = std::max(0, static_cast<int>(std::floor(s.t0_s)));
    const int b = std::min(n, static_cast<int>(std::floor(s.t1_s)));
    for (int i = a; i < b; ++i) mask[static_cast<std::size_t>(i)] = true;
  }
  return mask;
}

double seizure_seconds_in_window(const SecondMask& mask, int start_s,
                                 int window_s) {
  int count = 0;
  for (int s = start_s; s < start_s + window_s; ++s) {
    if (s >= 0 && s < static_cast<int>(mask.size()) &&
        mask[static_cast<std::size_t>(s)])
      ++count;
  }
  return static_cast<double>(count);
}

std::vector<int> window_starts(const SecondMask& mask, int duration_s,
                               const SegmentConfig& cfg) {
  std::vector<int> starts;
  const int win = static_cast<int>(kEpochSeconds);
  const int hop_stream = std::max(1, static_cast<int>(cfg.stream_hop_s));
  int t = 0;
  while (t + win <= duration_s) {
    starts.push_back(t);
    if (cfg.mode == SegmentMode::train) {
      const double sz = seizure_seconds_in_window(mask, t, win);
      t += (sz >= kSeizureLabelSeconds) ? 1 : 2;
    } else {
      t += hop_stream;
    }
  }
  return starts;
}

std::vector<std::pair<Epoch, EpochLabel>> segment_epochs(
    const Recording& rec32, const SecondMask& mask, const SegmentConfig& cfg) {
  rec32.validate();
  if (rec32.n_channels() != kMontageChannels)
    throw NumericError("segment_epochs: expected 12 channels, got " +
                       std::to_string(rec32.n_channels()));
  if (std::abs(rec32.fs_hz - kModelRateHz) > 1e-9)
    throw NumericError("segment_epochs: expected 32 Hz recording");

  const int duration_s =
      static_cast<int>(rec32.n_samples() / static_cast<int>(kModelRateHz));
  const int fs = static_cast<int>(kModelRateHz);

  std::vector<std::pair<Epoch, EpochLabel>> out;
  for (int t : window_starts(mask, duration_s, cfg)) {
    Epoch e;
    e.data = rec32.data.middleCols(static_cast<Eigen::Index>(t) * fs,
                                   kEpochSamples);
    e.t_start_us = static_cast<std::uint64_t>(t) * 1000000ull;
    const double sz = seizure_seconds_in_window(mask, t);
    out.emplace_back(std::move(e), make_epoch_label(sz));
  }
  return out;
}

std::optional<SeizureEvent> SeizureEventDetector::push(const EpochScore& s) {
  const bool contiguous =
      run_len_ == 0 || std::abs(s.t_start_s - (last_t_ + hop_s_)) < 1e-6;
  last_t_ = s.t_start_s;

  if (!contiguous || s.prob <= threshold_) {
    run_len_ = 0;
    run_prob_sum_ = 0.0;
    fired_ = false;
    if (s.prob <= threshold_) return std::nullopt;
    // a timing gap with a positive epoch starts a fresh run below
  }

  ++run_len_;
  run_prob_sum_ += s.prob;
  if (fired_) return std::nullopt;
  if (run_len_ * hop_s_ >= persistence_s_ - 1e-9) {
    fired_ = true;
    SeizureEvent ev;
    ev.t_start_s = s.t_start_s;
    ev.mean_prob = run_prob_sum_ / run_len_;
    ev.n_epochs = run_len_;
    return ev;
  }
  return std::nullopt;
}

void SeizureEventDetector::reset() {
  run_len_ = 0;
  run_prob_sum_ = 0.0;
  last_t_ = 0.0;
  fired_ = false;
}

std::vector<SeizureEvent> detection_decision(std::span<const EpochScore> probs,
                                             double threshold, double hop_s,
                                             double persistence_s) {
  SeizureEventDetector det(threshold, hop_s, persistence_s);
  std::vector<SeizureEvent> events;
  for (const auto& p : probs) {
    if (auto ev = det.push(p)) events.push_back(*ev);
  }
  return events;
}

}  // namespace neo
