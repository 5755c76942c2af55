#include "neo/dsp/biquad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "neo/errors.hpp"

namespace neo::dsp {

bool BiquadSection::stable() const {
  // |a2| < 1 and |a1| < 1 + a2
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

double BiquadSection::max_pole_radius() const {
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  const auto p1 = (-a1 + disc) / 2.0;
  const auto p2 = (-a1 - disc) / 2.0;
  return std::max(std::abs(p1), std::abs(p2));
}

BiquadCascade::BiquadCascade(std::vector<BiquadSection> sections)
    : sections_(std::move(sections)) {
  for (const auto& s : sections_) {
    if (!std::isfinite(s.b0) || !std::isfinite(s.b1) || !std::isfinite(s.b2) ||
        !std::isfinite(s.a1) || !std::isfinite(s.a2))
      throw NumericError("biquad: non-finite coefficient");
    if (!s.stable()) throw NumericError("biquad: unstable section");
  }
}

std::complex<double> BiquadCascade::response(double f_norm) const {
  const double w = 2.0 * std::numbers::pi * f_norm;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : sections_) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

double BiquadCascade::gain_db(double f_hz, double fs_hz) const {
  return 20.0 * std::log10(std::abs(response(f_hz / fs_hz)));
}

double BiquadCascade::max_pole_radius() const {
  double r = 0.0;
  for (const auto& s : sections_) r = std::max(r, s.max_pole_radius());
  return r;
}

BiquadFilter::BiquadFilter(BiquadCascade cascade, int channels)
    : cascade_(std::move(cascade)), channels_(channels) {
  if (channels_ <= 0) throw NumericError("biquad filter: channels must be > 0");
  state_.assign(cascade_.size(),
                std::vector<std::array<double, 2>>(
                    static_cast<std::size_t>(channels_), {0.0, 0.0}));
}

void BiquadFilter::reset() {
  for (auto& sec : state_)
    for (auto& ch : sec) ch = {0.0, 0.0};
}

void BiquadFilter::process_inplace(MatrixRM& x) {
  if (x.rows() != channels_)
    throw NumericError("biquad filter: got " + std::to_string(x.rows()) +
                       " channels, state allocated for " +
                       std::to_string(channels_));
  const auto& secs = cascade_.sections();
  for (int ch = 0; ch < channels_; ++ch) {
    double* row = x.row(ch).data();
    const Eigen::Index n = x.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(row[i]))
        throw NumericError("biquad filter: non-finite input at channel " +
                           std::to_string(ch) + ", index " +
                           std::to_string(i));
    }
    for (std::size_t k = 0; k < secs.size(); ++k) {
      const auto& s = secs[k];
      auto& st = state_[k][static_cast<std::size_t>(ch)];
      double s1 = st[0], s2 = st[1];
      for (Eigen::Index i = 0; i < n; ++i) {
        const double in = row[i];
        const double out = s.b0 * in + s1;
        s1 = s.b1 * in - s.a1 * out + s2;
        s2 = s.b2 * in - s.a2 * out;
        row[i] = out;
      }
      st = {s1, s2};
    }
  }
}

MatrixRM BiquadFilter::process(const MatrixRM& x) {
  MatrixRM y = x;
  process_inplace(y);
  return y;
}

std::vector<double> BiquadFilter::process(std::span<const double> x) {
  MatrixRM m(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    m(0, static_cast<Eigen::Index>(i)) = x[i];
  process_inplace(m);
  return std::vector<double>(m.data(), m.data() + m.cols());
}

std::vector<double> filter_signal(const BiquadCascade& c,
                                  std::span<const double> x) {
  BiquadFilter f(c, 1);
  return f.process(x);
}

MatrixRM filter_signal(const BiquadCascade& c, const MatrixRM& x) {
  BiquadFilter f(c, static_cast<int>(x.rows()));
  return f.process(x);
}

std::vector<double> filtfilt(const BiquadCascade& c,
                             std::span<const double> x) {
  auto fwd = filter_signal(c, x);
  std::reverse(fwd.begin(), fwd.end());
  auto back = filter_signal(c, fwd);
  std::reverse(back.begin(), back.end());
  return back;
}

}  // namespace neo::dsp
