#include "neo/dsp/resample.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "neo/errors.hpp"

namespace neo::dsp {

namespace {

// Zeroth-order modified Bessel function of the first kind (series form).
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

PolyphaseResampler::PolyphaseResampler(int up, int down, int half_taps,
                                       double kaiser_beta)
    : up_(up), down_(down) {
  if (up <= 0 || down <= 0)
    throw NumericError("resampler: factors must be positive");

  // Kaiser-windowed sinc, cutoff at the tighter of the two Nyquist rates
  // in the up-sampled domain.
  const int n_taps = 2 * half_taps * std::max(up, down) + 1;
  const double fc = 0.5 / std::max(up, down);  // cycles/sample, up-domain
  const int mid = (n_taps - 1) / 2;

  h_.assign(static_cast<std::size_t>(n_taps), 0.0);
  const double i0b = bessel_i0(kaiser_beta);
  for (int i = 0; i < n_taps; ++i) {
    const double t = static_cast<double>(i - mid);
    const double sinc =
        t == 0.0 ? 2.0 * fc
                 : std::sin(2.0 * std::numbers::pi * fc * t) /
                       (std::numbers::pi * t);
    const double r = 2.0 * t / (n_taps - 1);
    const double win = bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / i0b;
    h_[static_cast<std::size_t>(i)] = sinc * win;
  }
  center_ = mid;

  // Per-branch DC normalization: every polyphase leg sums to exactly 1,
  // so constants survive the rate change bit-for-bit.
  for (int p = 0; p < up_; ++p) {
    double s = 0.0;
    for (std::size_t j = static_cast<std::size_t>(p); j < h_.size();
         j += static_cast<std::size_t>(up_))
      s += h_[j];
    if (s == 0.0) throw NumericError("resampler: degenerate branch");
    for (std::size_t j = static_cast<std::size_t>(p); j < h_.size();
         j += static_cast<std::size_t>(up_))
      h_[j] /= s;
  }
}

PolyphaseResampler PolyphaseResampler::rate_250_to_32() {
  return PolyphaseResampler(16, 125);
}

std::vector<double> PolyphaseResampler::apply(
    std::span<const double> x) const {
  const auto n = static_cast<long long>(x.size());
  if (n % down_ != 0)
    throw NumericError("resampler: input length " + std::to_string(n) +
                       " is not a multiple of " + std::to_string(down_) +
                       " (stream layer buffers to multiples)");
  const long long n_out = n * up_ / down_;
  std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);

  const auto taps = static_cast<long long>(h_.size());
  for (long long m = 0; m < n_out; ++m) {
    // up-domain index of this output sample, filter centered
    const long long i = m * down_ + center_;
    // taps j with (i - j) divisible by up hit input samples (i - j)/up;
    // edges use replicate padding so constants pass through untouched
    const long long j0 = i % up_;
    double acc = 0.0;
    for (long long j = j0; j < taps; j += up_) {
      long long t = (i - j) / up_;
      if (t < 0) t = 0;
      if (t >= n) t = n - 1;
      acc += h_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(t)];
    }
    y[static_cast<std::size_t>(m)] = acc;
  }
  return y;
}

std::vector<double> resample_to_32hz(std::span<const double> x) {
  static const PolyphaseResampler r = PolyphaseResampler::rate_250_to_32();
  return r.apply(x);
}

Recording resample_to_32hz(const Recording& rec) {
  if (std::abs(rec.fs_hz - 250.0) > 1e-9)
    throw NumericError("resample_to_32hz: expected 250 Hz input");
  static const PolyphaseResampler r = PolyphaseResampler::rate_250_to_32();
  Recording out;
  out.fs_hz = 32.0;
  out.channels = rec.channels;
  out.meta = rec.meta;
  const auto cols_out = rec.n_samples() * 16 / 125;
  out.data.resize(rec.n_channels(), cols_out);
  for (Eigen::Index ch = 0; ch < rec.n_channels(); ++ch) {
    std::span<const double> row(rec.data.row(ch).data(),
                                static_cast<std::size_t>(rec.n_samples()));
    auto v = r.apply(row);
    for (Eigen::Index i = 0; i < cols_out; ++i)
      out.data(ch, i) = v[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace neo::dsp
