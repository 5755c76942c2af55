#include "neo/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "neo/dsp/welch.hpp"

namespace neo {

StreamPipeline::StreamPipeline(
    const MontageGraph& montage,
    std::shared_ptr<const detect::WeightContainer> weights,
    PipelineConfig cfg)
    : montage_(montage),
      cfg_(cfg),
      acq_filter_(dsp::design_preprocessing_chain(kDeviceRateHz, cfg.edges),
                  kAdcChannels),
      motion_(cfg.motion, stream::kAccelLsbPerG, stream::kGyroLsbPerDps),
      event_detector_(cfg.threshold, cfg.hop_s) {
  if (cfg_.detector == DetectorKind::model) {
    if (!weights)
      throw NumericError("pipeline: model detector requires weights");
    model_.emplace(std::move(weights), montage_);
  }
  ring_.setZero(kAdcChannels, 3000);
  hop_samples_ = static_cast<int>(std::lround(cfg_.hop_s * kDeviceRateHz));
}

void StreamPipeline::push(const SampleFrame& frame) {
  const Eigen::Index w = write_pos_ % ring_.cols();
  for (int ch = 0; ch < kAdcChannels; ++ch)
    ring_(ch, w) = adc_to_microvolts(frame.adc[static_cast<std::size_t>(ch)],
                                     cfg_.vref_v, cfg_.gain);
  // acquisition chain, streaming state, in place on the new column
  {
    MatrixRM col = ring_.col(w);
    acq_filter_.process_inplace(col);
    ring_.col(w) = col.col(0);
  }
  ++write_pos_;

  if (auto ev = motion_.push(frame)) {
    if (on_motion) on_motion(*ev);
  }

  ++frames_seen_;
  window_end_us_ = frame.t_us + kFrameIntervalUs;
  if (++since_hop_ >= hop_samples_) {
    since_hop_ = 0;
    if (write_pos_ >= ring_.cols()) run_hop();
  }
}

double StreamPipeline::fixture_probability(const MatrixRM& window12) const {
  // mean share of 2-4 Hz power within 0.5-16 Hz across channels, squashed
  double ratio = 0.0;
  for (Eigen::Index ch = 0; ch < window12.rows(); ++ch) {
    std::span<const double> row(window12.row(ch).data(),
                                static_cast<std::size_t>(window12.cols()));
    const auto psd = dsp::welch_psd(row, kDeviceRateHz);
    const double total = psd.band_power(0.5, 16.0);
    if (total > 0) ratio += psd.band_power(2.0, 4.0) / total;
  }
  ratio /= static_cast<double>(window12.rows());
  return 1.0 / (1.0 + std::exp(-(ratio - 0.35) * 20.0));
}

void StreamPipeline::run_hop() {
  const auto t0 = std::chrono::steady_clock::now();

  // materialize the window in time order from the circular store
  const Eigen::Index n = ring_.cols();
  const Eigen::Index head = write_pos_ % n;  // oldest sample
  Recording raw;
  raw.fs_hz = kDeviceRateHz;
  raw.channels = montage_.raw_channels();
  raw.data.resize(kAdcChannels, n);
  raw.data.leftCols(n - head) = ring_.rightCols(n - head);
  if (head > 0) raw.data.rightCols(head) = ring_.leftCols(head);

  const Recording bipolar = derive_bipolar(raw, montage_);

  const std::uint64_t t_start_us =
      window_end_us_ >= 12000000ull ? window_end_us_ - 12000000ull : 0;

  EpochReport rep;
  rep.t_start_s = static_cast<double>(t_start_us) / 1e6;

  if (cfg_.detector == DetectorKind::model) {
    const Epoch epoch = model_->preprocess(bipolar.data, t_start_us);
    const auto fwd = model_->forward(epoch);
    rep.probability = fwd.probability;
    const auto rel = detect::grad_cam(*model_, fwd);
    rep.top_channels = rel.top_channels(3);
  } else {
    rep.probability = fixture_probability(bipolar.data);
  }

  rep.process_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  if (on_epoch) on_epoch(rep);

  if (auto ev = event_detector_.push({rep.t_start_s, rep.probability})) {
    if (on_seizure) on_seizure(*ev);
  }
}

}  // namespace neo
