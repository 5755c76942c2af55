#include "neo/dsp/design.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "neo/errors.hpp"

namespace neo::dsp {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct Zpk {
  std::vector<cd> z;
  std::vector<cd> p;
  double k = 1.0;
};

// Analog Butterworth lowpass prototype (cutoff 1 rad/s, no zeros, k = 1).
Zpk butterworth_prototype(int order) {
  Zpk proto;
  for (int i = 0; i < order; ++i) {
    const double theta = kPi * (2.0 * i + 1.0) / (2.0 * order) + kPi / 2.0;
    proto.p.emplace_back(std::cos(theta), std::sin(theta));
  }
  proto.k = 1.0;
  return proto;
}

// Analog inverse-Chebyshev lowpass prototype, stopband edge 1 rad/s.
Zpk cheby2_prototype(int order, double stop_atten_db) {
  Zpk proto;
  const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * stop_atten_db) - 1.0);
  const double mu = std::asinh(1.0 / de) / order;

  for (int i = 0; i < order; ++i) {
    const int m = -order + 1 + 2 * i;
    const double theta = kPi * m / (2.0 * order);
    // zeros on the imaginary axis (skip the infinite one for odd order)
    if (order % 2 == 0 || m != 0)
      proto.z.emplace_back(0.0, -1.0 / std::sin(theta));
    // Chebyshev-I pole on the ellipse, then reciprocate
    const cd p1(-std::sinh(mu) * std::cos(theta),
                std::cosh(mu) * std::sin(theta));
    proto.p.push_back(1.0 / p1);
  }

  cd num(1.0, 0.0), den(1.0, 0.0);
  for (const auto& z : proto.z) num *= -z;
  for (const auto& p : proto.p) den *= -p;
  proto.k = (den / num).real();  // unity DC gain
  return proto;
}

// Lowpass (cutoff 1 rad/s) -> bandpass [w1, w2] rad/s transform on zpk.
Zpk lp_to_bp(const Zpk& lp, double w1, double w2) {
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;
  const auto transform = [&](const cd& s) {
    const cd a = s * bw / 2.0;
    const cd d = std::sqrt(a * a - w0sq);
    return std::pair<cd, cd>{a + d, a - d};
  };

  Zpk bp;
  for (const auto& z : lp.z) {
    auto [u, v] = transform(z);
    bp.z.push_back(u);
    bp.z.push_back(v);
  }
  for (const auto& p : lp.p) {
    auto [u, v] = transform(p);
    bp.p.push_back(u);
    bp.p.push_back(v);
  }
  const int degree = static_cast<int>(lp.p.size() - lp.z.size());
  for (int i = 0; i < degree; ++i) bp.z.emplace_back(0.0, 0.0);
  bp.k = lp.k * std::pow(bw, degree);
  return bp;
}

// Bilinear transform s = (z-1)/(z+1); maps analog tan(pi*f) to digital
// frequency f (cycles/sample), matching the pre-warp in design_bandpass_zpk.
Zpk bilinear(const Zpk& analog) {
  const double fs2 = 1.0;
  Zpk digital;
  cd num(1.0, 0.0), den(1.0, 0.0);
  for (const auto& z : analog.z) {
    digital.z.push_back((fs2 + z) / (fs2 - z));
    num *= (fs2 - z);
  }
  for (const auto& p : analog.p) {
    digital.p.push_back((fs2 + p) / (fs2 - p));
    den *= (fs2 - p);
  }
  const int degree = static_cast<int>(analog.p.size() - analog.z.size());
  for (int i = 0; i < degree; ++i) digital.z.emplace_back(-1.0, 0.0);
  digital.k = analog.k * (num / den).real();
  return digital;
}

// Collect conjugate pairs; roots must come in conjugate pairs or be real.
struct RootPair {
  cd r1, r2;
  cd representative() const { return r1; }
};

std::vector<RootPair> pair_roots(std::vector<cd> roots) {
  constexpr double tol = 1e-8;
  std::vector<RootPair> pairs;
  std::vector<cd> reals;
  std::vector<cd> complexes;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) < tol)
      reals.emplace_back(r.real(), 0.0);
    else
      complexes.push_back(r);
  }
  std::vector<bool> used(complexes.size(), false);
  for (std::size_t i = 0; i < complexes.size(); ++i) {
    if (used[i]) continue;
    const cd want = std::conj(complexes[i]);
    std::size_t best = i;
    double best_d = 1e30;
    for (std::size_t j = i + 1; j < complexes.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(complexes[j] - want);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == i || best_d > 1e-4)
      throw NumericError("filter design: unpaired complex root");
    used[i] = used[best] = true;
    pairs.push_back({complexes[i], std::conj(complexes[i])});
  }
  // pair reals greedily (sorted keeps it deterministic)
  std::sort(reals.begin(), reals.end(),
            [](const cd& a, const cd& b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
    pairs.push_back({reals[i], reals[i + 1]});
  if (reals.size() % 2 != 0)
    pairs.push_back({reals.back(), cd(0.0, 0.0)});  // degenerate first-order
  return pairs;
}

// Real SOS realization: pair each pole pair with the nearest zero pair,
// distribute the overall gain evenly across sections.
BiquadCascade zpk_to_sos(const Zpk& zpk) {
  if (zpk.z.size() != zpk.p.size())
    throw NumericError("filter design: zero/pole count mismatch");
  auto zp = pair_roots(zpk.z);
  auto pp = pair_roots(zpk.p);
  if (zp.size() != pp.size())
    throw NumericError("filter design: section pairing mismatch");

  // process poles closest to the unit circle first
  std::sort(pp.begin(), pp.end(), [](const RootPair& a, const RootPair& b) {
    return std::abs(a.representative()) > std::abs(b.representative());
  });

  std::vector<BiquadSection> sections;
  std::vector<bool> ztaken(zp.size(), false);
  const double ksec = std::pow(std::abs(zpk.k), 1.0 / zp.size());
  const double ksign = zpk.k < 0 ? -1.0 : 1.0;

  for (std::size_t i = 0; i < pp.size(); ++i) {
    // nearest unused zero pair
    std::size_t best = 0;
    double best_d = 1e30;
    for (std::size_t j = 0; j < zp.size(); ++j) {
      if (ztaken[j]) continue;
      const double d =
          std::abs(pp[i].representative() - zp[j].representative());
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    ztaken[best] = true;

    const cd z1 = zp[best].r1, z2 = zp[best].r2;
    const cd p1 = pp[i].r1, p2 = pp[i].r2;
    BiquadSection s;
    const double g = ksec * (i == 0 ? ksign : 1.0);
    s.b0 = g;
    s.b1 = -g * (z1 + z2).real();
    s.b2 = g * (z1 * z2).real();
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    sections.push_back(s);
  }
  return BiquadCascade(std::move(sections));
}

Zpk design_bandpass_zpk(const Zpk& proto, double lo_norm, double hi_norm) {
  const double w1 = std::tan(kPi * lo_norm);
  const double w2 = std::tan(kPi * hi_norm);
  return bilinear(lp_to_bp(proto, w1, w2));
}

}  // namespace

BiquadCascade design_butterworth_bandpass(int order, double lo_norm,
                                          double hi_norm) {
  if (order < 2 || order % 2 != 0)
    throw NumericError("butterworth bandpass: order must be even and >= 2");
  if (!(lo_norm > 0.0 && lo_norm < hi_norm && hi_norm < 0.5))
    throw NumericError(
        "butterworth bandpass: edges must satisfy 0 < lo < hi < 0.5 "
        "cycles/sample");
  return zpk_to_sos(
      design_bandpass_zpk(butterworth_prototype(order), lo_norm, hi_norm));
}

BiquadCascade design_butterworth_bandpass_hz(int order, double lo_hz,
                                             double hi_hz, double fs_hz) {
  if (fs_hz <= 0) throw NumericError("butterworth bandpass: fs must be > 0");
  return design_butterworth_bandpass(order, lo_hz / fs_hz, hi_hz / fs_hz);
}

BiquadCascade design_notch(double center_hz, double bw_3db_hz, double fs_hz) {
  if (fs_hz <= 0) throw NumericError("notch: fs must be > 0");
  if (!(center_hz > 0.0 && center_hz < fs_hz / 2.0))
    throw NumericError("notch: center must lie below Nyquist");
  if (bw_3db_hz <= 0) throw NumericError("notch: bandwidth must be > 0");

  const double w0 = 2.0 * kPi * center_hz / fs_hz;
  const double c = std::cos(w0);

  const auto make = [&](double alpha) {
    BiquadSection s;
    const double a0 = 1.0 + alpha;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * c / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * c / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
  };
  const auto edge_gain = [&](double alpha) {
    BiquadCascade cas({make(alpha)});
    const double f_edge = (center_hz - bw_3db_hz / 2.0) / fs_hz;
    return std::abs(cas.response(f_edge));
  };

  // Bisect the pole-bandwidth parameter so that |H| at center - bw/2 is
  // exactly -3 dB; the cookbook Q = f0/bw seed is close already.
  const double target = 1.0 / std::sqrt(2.0);
  double lo = std::sin(w0) / (2.0 * (center_hz / bw_3db_hz)) * 0.2;
  double hi_a = std::min(0.999, std::sin(w0) / (2.0 * (center_hz / bw_3db_hz)) * 5.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi_a);
    // larger alpha -> wider notch -> lower edge gain
    if (edge_gain(mid) > target)
      lo = mid;
    else
      hi_a = mid;
  }
  return BiquadCascade({make(0.5 * (lo + hi_a))});
}

BiquadCascade design_chebyshev2_bandpass(int order, double lo_hz, double hi_hz,
                                         double stop_atten_db, double fs_hz) {
  if (fs_hz <= 0) throw NumericError("cheby2 bandpass: fs must be > 0");
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs_hz / 2.0))
    throw NumericError("cheby2 bandpass: edges must satisfy 0 < lo < hi < "
                       "Nyquist");
  if (order < 2 || order % 2 != 0)
    throw NumericError("cheby2 bandpass: order must be even and >= 2");
  if (stop_atten_db <= 0)
    throw NumericError("cheby2 bandpass: attenuation must be > 0 dB");
  return zpk_to_sos(design_bandpass_zpk(cheby2_prototype(order, stop_atten_db),
                                        lo_hz / fs_hz, hi_hz / fs_hz));
}

BiquadCascade design_preprocessing_chain(double fs_hz,
                                         EdgeInterpretation interp, int order,
                                         double lo_edge, double hi_edge) {
  double lo = lo_edge, hi = hi_edge;
  if (interp == EdgeInterpretation::nyquist_relative) {
    lo /= 2.0;
    hi /= 2.0;
  }
  auto bp = design_butterworth_bandpass(order, lo, hi);
  std::vector<BiquadSection> all = bp.sections();
  for (double f : {50.0, 100.0}) {
    if (f < fs_hz / 2.0) {
      auto n = design_notch(f, 4.0, fs_hz);
      all.insert(all.end(), n.sections().begin(), n.sections().end());
    }
  }
  return BiquadCascade(std::move(all));
}

}  // namespace neo::dsp
