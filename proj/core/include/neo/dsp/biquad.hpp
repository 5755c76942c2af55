#pragma once

#include <complex>
#include <span>
#include <vector>

#include "neo/types.hpp"

namespace neo::dsp {

/// One second-order section, normalized (a0 == 1).
struct BiquadSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Poles strictly inside the unit circle (stability triangle).
  bool stable() const;
  double max_pole_radius() const;
};

/// Immutable cascade of second-order sections. Designs are shareable across
/// threads; runtime state lives in BiquadFilter.
class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<BiquadSection> sections);

  const std::vector<BiquadSection>& sections() const { return sections_; }
  std::size_t size() const { return sections_.size(); }

  /// Complex frequency response at normalized frequency f (cycles/sample).
  std::complex<double> response(double f_norm) const;
  double gain_db(double f_hz, double fs_hz) const;

  double max_pole_radius() const;

 private:
  std::vector<BiquadSection> sections_;
};

/// Cascade plus per-channel delay registers (direct form II transposed).
/// Single-owner: one stream per instance.
class BiquadFilter {
 public:
  BiquadFilter(BiquadCascade cascade, int channels);

  /// Streaming, causal, per-channel. State carries across calls, so
  /// filtering a signal in two halves equals filtering it whole.
  /// Throws NumericError naming channel and index on non-finite input.
  MatrixRM process(const MatrixRM& x);
  void process_inplace(MatrixRM& x);

  std::vector<double> process(std::span<const double> x);  // 1-channel helper

  void reset();
  int channels() const { return channels_; }
  const BiquadCascade& cascade() const { return cascade_; }

 private:
  BiquadCascade cascade_;
  int channels_;
  // state_[section][channel] = {s1, s2}
  std::vector<std::vector<std::array<double, 2>>> state_;
};

/// Streaming application of a designed cascade (stateful across calls).
inline MatrixRM filter_forward(BiquadFilter& f, const MatrixRM& x) {
  return f.process(x);
}

/// One-shot, zero-initial-state convenience for whole signals.
std::vector<double> filter_signal(const BiquadCascade& c,
                                  std::span<const double> x);
MatrixRM filter_signal(const BiquadCascade& c, const MatrixRM& x);

/// Offline forward-backward pass (zero-phase; not for the live path).
std::vector<double> filtfilt(const BiquadCascade& c, std::span<const double> x);

}  // namespace neo::dsp
