#include "neo/stream/synth.hpp"

#include <cmath>
#include <numbers>

#include "neo/adc.hpp"
#include "neo/stream/motion.hpp"

namespace neo::stream {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// raw channel order matches MontageGraph::raw_channels() with reference Cz:
// Fp1, Fp2, C3, C4, T3, T4, O1, O2
constexpr int kFp1 = 0, kFp2 = 1, kC3 = 2, kC4 = 3;
constexpr int kT3 = 4, kT4 = 5, kO1 = 6, kO2 = 7;

// 3 Hz spike-and-wave cycle: sharp negative spike then a slow half-wave.
double spike_wave(double phase01) {
  const double spike =
      std::exp(-0.5 * std::pow((phase01 - 0.15) / 0.045, 2.0));
  const double wave =
      phase01 > 0.3 ? std::sin(std::numbers::pi * (phase01 - 0.3) / 0.7) : 0.0;
  return -1.2 * spike + 0.8 * wave;
}

// raised-cosine blink bump
double blink_shape(double u01) {
  return 0.5 * (1.0 - std::cos(kTwoPi * u01));
}

}  // namespace

std::string to_string(BrainState s) {
  switch (s) {
    case BrainState::eyes_open: return "eyes_open";
    case BrainState::eyes_closed: return "eyes_closed";
    case BrainState::seizure: return "seizure";
  }
  return "?";
}

SyntheticDevice::SyntheticDevice(SynthConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  if (cfg_.segments.empty())
    cfg_.segments.push_back({0.0, cfg_.duration_s, BrainState::eyes_open});

  // fixed per-channel pickup differences so bipolar derivations do not
  // cancel shared sources exactly
  std::uniform_real_distribution<double> u(0.8, 1.2);
  for (auto& g : line_gain_) g = u(rng_);
  const double szg[kAdcChannels] = {0.85, 0.80, 1.00, 0.95,
                                    0.90, 0.88, 0.70, 0.72};
  for (int i = 0; i < kAdcChannels; ++i) seizure_gain_[i] = szg[i];

  if (cfg_.blink_uv > 0.0 && cfg_.blink_rate_hz > 0.0) {
    std::exponential_distribution<double> exp_d(cfg_.blink_rate_hz);
    double t = exp_d(rng_);
    while (t < cfg_.duration_s) {
      blink_times_.push_back(t);
      t += blink_len_s_ + exp_d(rng_);
    }
  }
}

BrainState SyntheticDevice::state_at(double t) const {
  for (const auto& s : cfg_.segments)
    if (t >= s.t0_s && t < s.t1_s) return s.state;
  return BrainState::eyes_open;
}

void SyntheticDevice::sample_uv(double t, double* out) {
  const BrainState st = state_at(t);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // oscillator phases advance per sample
  alpha_phase_ += kTwoPi * 10.0 / kDeviceRateHz;
  line_phase_ += kTwoPi * 50.0 / kDeviceRateHz;
  if (alpha_phase_ > kTwoPi) alpha_phase_ -= kTwoPi;
  if (line_phase_ > kTwoPi) line_phase_ -= kTwoPi;

  const double alpha_mod = 0.8 + 0.4 * std::sin(kTwoPi * 0.25 * t);
  const double alpha = st == BrainState::eyes_closed
                           ? cfg_.alpha_uv * alpha_mod * std::sin(alpha_phase_)
                           : 0.0;
  const double sz =
      st == BrainState::seizure
          ? cfg_.seizure_uv * spike_wave(t * 3.0 - std::floor(t * 3.0))
          : 0.0;

  double blink = 0.0;
  if (cfg_.blink_uv > 0.0) {
    for (double bt : blink_times_) {
      if (t >= bt && t < bt + blink_len_s_)
        blink = cfg_.blink_uv * blink_shape((t - bt) / blink_len_s_);
      if (bt > t) break;
    }
  }

  for (int ch = 0; ch < kAdcChannels; ++ch) {
    // Kellet economy pink filter, output roughly unit RMS for unit white
    auto& p = pink_[ch];
    const double w = gauss(rng_);
    p.b0 = 0.99765 * p.b0 + w * 0.0990460;
    p.b1 = 0.96300 * p.b1 + w * 0.2965164;
    p.b2 = 0.57000 * p.b2 + w * 1.0526913;
    const double pink = (p.b0 + p.b1 + p.b2 + w * 0.1848) * 0.25;

    double v = cfg_.background_uv * pink + cfg_.noise_uv * gauss(rng_);
    v += cfg_.line_uv * line_gain_[ch] * std::sin(line_phase_);
    v += sz * seizure_gain_[ch];
    if (ch == kO1 || ch == kO2)
      v += alpha * (ch == kO1 ? 1.0 : 0.94);
    if (blink != 0.0) {
      if (ch == kFp1) v += blink;
      if (ch == kFp2) v += 0.93 * blink;
      if (ch == kC3 || ch == kC4) v += 0.12 * blink;
    }
    out[ch] = v;
  }
}

void SyntheticDevice::sample_imu(double t, std::array<std::int16_t, 3>& accel,
                                 std::array<std::int16_t, 3>& gyro) {
  double ax = 0.0, ay = 0.0, az = 1.0;  // gravity on z, in g
  double gx = 0.0, gy = 0.0, gz = 0.0;  // deg/s
  for (const auto& m : cfg_.motion) {
    if (t >= m.t0_s && t < m.t0_s + m.dur_s) {
      const double u = (t - m.t0_s) / m.dur_s;
      const double env = std::sin(std::numbers::pi * u);
      az += m.accel_g * env;  // along gravity: norm deviation == accel_g
      gy += m.gyro_dps * env;
    }
  }
  std::uniform_int_distribution<int> jitter(-4, 4);
  const auto q = [&](double v, double lsb) {
    const double raw = v * lsb + jitter(rng_);
    return static_cast<std::int16_t>(
        std::clamp(raw, -32768.0, 32767.0));
  };
  accel = {q(ax, kAccelLsbPerG), q(ay, kAccelLsbPerG), q(az, kAccelLsbPerG)};
  gyro = {q(gx, kGyroLsbPerDps), q(gy, kGyroLsbPerDps),
          q(gz, kGyroLsbPerDps)};
}

SampleFrame SyntheticDevice::next_frame() {
  SampleFrame f;
  f.seq = seq_;
  f.t_us = static_cast<std::uint64_t>(seq_) * kFrameIntervalUs;
  const double t = static_cast<double>(seq_) / kDeviceRateHz;
  double uv[kAdcChannels];
  sample_uv(t, uv);
  for (int ch = 0; ch < kAdcChannels; ++ch)
    f.adc[static_cast<std::size_t>(ch)] =
        microvolts_to_adc(uv[ch], cfg_.vref_v, cfg_.gain);
  sample_imu(t, f.accel, f.gyro);
  ++seq_;
  return f;
}

std::vector<SampleFrame> SyntheticDevice::frames(std::size_t n) {
  std::vector<SampleFrame> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next_frame());
  return out;
}

Recording SyntheticDevice::render_recording() {
  const auto n =
      static_cast<Eigen::Index>(std::llround(cfg_.duration_s * kDeviceRateHz));
  Recording rec;
  rec.fs_hz = kDeviceRateHz;
  rec.channels = {"Fp1", "Fp2", "C3", "C4", "T3", "T4", "O1", "O2"};
  rec.meta.gain = cfg_.gain;
  rec.meta.vref_v = cfg_.vref_v;
  rec.data.resize(kAdcChannels, n);
  double uv[kAdcChannels];
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kDeviceRateHz;
    sample_uv(t, uv);
    for (int ch = 0; ch < kAdcChannels; ++ch) rec.data(ch, i) = uv[ch];
  }
  return rec;
}

std::vector<AnnotationSpan> SyntheticDevice::annotations() const {
  std::vector<AnnotationSpan> out;
  for (const auto& s : cfg_.segments)
    out.push_back({s.t0_s, s.t1_s, to_string(s.state)});
  return out;
}

}  // namespace neo::stream
