#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "neo/dsp/biquad.hpp"
#include "neo/dsp/design.hpp"
#include "neo/dsp/fft.hpp"
#include "neo/dsp/resample.hpp"
#include "neo/dsp/welch.hpp"
#include "neo/errors.hpp"
#include "oracles.hpp"

using namespace neo;
using namespace neo::dsp;

namespace {

// direct-form I reference, double precision
std::vector<double> direct_form_reference(const BiquadCascade& c,
                                          std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  for (const auto& s : c.sections()) {
    std::vector<double> y(cur.size(), 0.0);
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double xn = cur[i];
      y[i] = s.b0 * xn + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
      x2 = x1;
      x1 = xn;
      y2 = y1;
      y1 = y[i];
    }
    cur = y;
  }
  return cur;
}

}  // namespace

TEST_CASE("fft matches naive dft for power-of-two and odd sizes") {
  for (std::size_t n : {16u, 256u, 500u, 384u, 125u}) {
    auto x = oracles::white_noise(n, 42 + n);
    const auto got = fft_real(x);
    const auto want = oracles::naive_dft(x);
    REQUIRE(got.size() == want.size());
    double max_err = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      max_err = std::max(max_err, std::abs(got[k] - want[k]));
    CHECK(max_err < 1e-8 * static_cast<double>(n));
  }
}

TEST_CASE("fft inverse round-trips") {
  auto x = oracles::white_noise(500, 9);
  std::vector<std::complex<double>> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = {x[i], 0.0};
  const auto back = fft(fft(c, false), true);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(back[i].real() == doctest::Approx(x[i]).epsilon(1e-10));
}

// ---------------------------------------------------------------- designs

TEST_CASE("butterworth bandpass 0.004-0.4 of fs: passband and skirts") {
  const auto bp = design_butterworth_bandpass(4, 0.004, 0.4);
  CHECK(bp.size() == 4);  // prototype order 4 -> 8 poles

  const double fs = 250.0;
  // passband: 50 Hz well inside 1-100 Hz
  CHECK(bp.gain_db(50.0, fs) >= -1.0);
  // geometric band center within 0.1 dB of unity
  const double fc = std::sqrt(1.0 * 100.0);
  CHECK(std::abs(bp.gain_db(fc, fs)) <= 0.1);
  // one octave below the low edge: >= 24 dB down (1 dB tolerance)
  CHECK(bp.gain_db(0.5, fs) <= -23.0);
  // octave above the high edge folds past Nyquist; the band edge zeros at
  // Nyquist dominate there
  CHECK(bp.gain_db(124.9, fs) <= -23.0);

  for (const auto& s : bp.sections()) CHECK(s.max_pole_radius() < 1.0 - 1e-6);
}

TEST_CASE("butterworth bandpass rejects bad edges and odd orders") {
  CHECK_THROWS_AS(design_butterworth_bandpass(4, 0.4, 0.004), NumericError);
  CHECK_THROWS_AS(design_butterworth_bandpass(4, 0.0, 0.4), NumericError);
  CHECK_THROWS_AS(design_butterworth_bandpass(4, 0.1, 0.5), NumericError);
  CHECK_THROWS_AS(design_butterworth_bandpass(3, 0.004, 0.4), NumericError);
}

TEST_CASE("bandpass kills DC") {
  const auto bp = design_butterworth_bandpass(4, 0.004, 0.4);
  std::vector<double> ones(2500, 1.0);
  const auto y = filter_signal(bp, ones);
  CHECK(std::abs(y.back()) < 1e-4);
  CHECK(std::abs(bp.response(0.0)) < 1e-12);
}

TEST_CASE("measured transfer function matches analytic response in band") {
  const auto bp = design_butterworth_bandpass(4, 0.004, 0.4);
  const auto x = oracles::white_noise(40000, 77);
  const auto y = filter_signal(bp, x);

  std::vector<double> freqs;
  const auto meas_db = oracles::measured_transfer_db(x, y, 1024, freqs);
  int checked = 0;
  for (std::size_t k = 1; k + 1 < freqs.size(); ++k) {
    const double analytic_db =
        20.0 * std::log10(std::abs(bp.response(freqs[k])));
    if (analytic_db < -1.0) continue;  // compare across the passband
    // skip bins where the response moves fast within the estimator's
    // resolution (spectral smearing bias, not a filter error)
    const double lo_db = 20.0 * std::log10(std::abs(bp.response(freqs[k - 1])));
    const double hi_db = 20.0 * std::log10(std::abs(bp.response(freqs[k + 1])));
    if (std::abs(hi_db - lo_db) > 0.5) continue;
    CHECK(std::abs(meas_db[k] - analytic_db) < 1.0);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("notch 50 Hz: depth, -3 dB points, and far response") {
  const double fs = 250.0;
  const auto n50 = design_notch(50.0, 4.0, fs);
  CHECK(n50.gain_db(50.0, fs) <= -30.0);
  CHECK(n50.gain_db(48.0, fs) == doctest::Approx(-3.01).epsilon(0.35));
  CHECK(n50.gain_db(52.0, fs) == doctest::Approx(-3.01).epsilon(0.35));
  CHECK(std::abs(n50.gain_db(30.0, fs)) <= 0.5);  // center - 5*bw
  CHECK(std::abs(n50.gain_db(70.0, fs)) <= 0.5);  // center + 5*bw

  const auto n100 = design_notch(100.0, 4.0, fs);
  CHECK(n100.gain_db(100.0, fs) <= -30.0);

  CHECK_THROWS_AS(design_notch(130.0, 4.0, fs), NumericError);
  CHECK_THROWS_AS(design_notch(50.0, -1.0, fs), NumericError);
}

TEST_CASE("notch steady-state sinusoid oracle") {
  const double fs = 250.0;
  const auto n50 = design_notch(50.0, 4.0, fs);
  const std::size_t n = 2500;  // 10 s
  const std::size_t skip = 1250;

  auto probe50 = oracles::sine(n, fs, 50.0);
  auto y50 = filter_signal(n50, probe50);
  const double att_db = 20.0 * std::log10(oracles::rms(y50, skip) /
                                          oracles::rms(probe50, skip));
  CHECK(att_db <= -30.0);

  auto probe10 = oracles::sine(n, fs, 10.0);
  auto y10 = filter_signal(n50, probe10);
  const double change_db = 20.0 * std::log10(oracles::rms(y10, skip) /
                                             oracles::rms(probe10, skip));
  CHECK(std::abs(change_db) <= 0.5);

  std::vector<double> zeros(1000, 0.0);
  auto yz = filter_signal(n50, zeros);
  for (double v : yz) CHECK(v == 0.0);
}

TEST_CASE("chebyshev-II 2-30 Hz analysis band") {
  const double fs = 250.0;
  const auto ch = design_chebyshev2_bandpass(4, 2.0, 30.0, 40.0, fs);
  CHECK(ch.gain_db(16.0, fs) >= -1.0);
  CHECK(ch.gain_db(50.0, fs) <= -39.0);
  CHECK(ch.gain_db(1.0, fs) <= -39.0);

  // stability / finite impulse-response energy
  std::vector<double> impulse(4096, 0.0);
  impulse[0] = 1.0;
  const auto h = filter_signal(ch, impulse);
  double energy = 0.0;
  for (double v : h) energy += v * v;
  CHECK(std::isfinite(energy));
  CHECK(std::abs(h.back()) < 1e-8);
  CHECK(ch.max_pole_radius() < 1.0 - 1e-6);
}

TEST_CASE("preprocessing chain: powerline suppressed, 10 Hz passed") {
  const double fs = 250.0;
  const auto chain = design_preprocessing_chain(fs);
  const std::size_t n = 5000, skip = 2500;

  auto p50 = oracles::sine(n, fs, 50.0);
  auto y50 = filter_signal(chain, p50);
  CHECK(20.0 * std::log10(oracles::rms(y50, skip) / oracles::rms(p50, skip)) <=
        -30.0);

  auto p10 = oracles::sine(n, fs, 10.0);
  auto y10 = filter_signal(chain, p10);
  CHECK(std::abs(20.0 * std::log10(oracles::rms(y10, skip) /
                                   oracles::rms(p10, skip))) <= 1.5);

  // nyquist-relative interpretation shifts the band edges
  const auto alt =
      design_preprocessing_chain(fs, EdgeInterpretation::nyquist_relative);
  CHECK(alt.gain_db(25.0, fs) >= -1.0);   // 0.5-50 Hz band
  CHECK(alt.gain_db(80.0, fs) <= -10.0);  // beyond the 50 Hz edge
}

TEST_CASE("all default designs stay comfortably inside the unit circle") {
  for (const auto& c :
       {design_butterworth_bandpass(4, 0.004, 0.4),
        design_butterworth_bandpass_hz(4, 1.0, 16.0, 250.0),
        design_notch(50.0, 4.0, 250.0), design_notch(100.0, 4.0, 250.0),
        design_chebyshev2_bandpass(4, 2.0, 30.0, 40.0, 250.0)}) {
    CHECK(c.max_pole_radius() < 1.0 - 1e-6);
  }
}

// ----------------------------------------------------------- application

TEST_CASE("filter_forward: zeros in, zeros out, state preserved") {
  BiquadFilter f(design_notch(50.0, 4.0, 250.0), 2);
  MatrixRM x = MatrixRM::Zero(2, 500);
  auto y = filter_forward(f, x);
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("filter_forward: split equals whole, bit-identical") {
  const auto chain = design_preprocessing_chain(250.0);
  const auto xv = oracles::white_noise(3000, 3);
  MatrixRM x(2, 3000);
  for (int i = 0; i < 3000; ++i) {
    x(0, i) = xv[static_cast<std::size_t>(i)];
    x(1, i) = xv[static_cast<std::size_t>(i)] * 0.5 + 1.0;
  }

  BiquadFilter whole(chain, 2);
  const MatrixRM y = whole.process(x);

  BiquadFilter split(chain, 2);
  const MatrixRM y1 = split.process(x.leftCols(1111));
  const MatrixRM y2 = split.process(x.rightCols(3000 - 1111));
  for (int ch = 0; ch < 2; ++ch) {
    for (int i = 0; i < 1111; ++i) CHECK(y1(ch, i) == y(ch, i));
    for (int i = 0; i < 3000 - 1111; ++i)
      CHECK(y2(ch, i) == y(ch, 1111 + i));
  }
}

TEST_CASE("filter_forward: impulse response matches direct-form reference") {
  const auto bp = design_butterworth_bandpass(4, 0.004, 0.4);
  std::vector<double> impulse(2048, 0.0);
  impulse[0] = 1.0;
  const auto got = filter_signal(bp, impulse);
  const auto want = direct_form_reference(bp, impulse);
  double ref_norm = 0.0, err_norm = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    ref_norm += want[i] * want[i];
    err_norm += (got[i] - want[i]) * (got[i] - want[i]);
  }
  CHECK(std::sqrt(err_norm / ref_norm) < 1e-10);
}

TEST_CASE("filter_forward: non-finite input names channel and index") {
  BiquadFilter f(design_notch(50.0, 4.0, 250.0), 3);
  MatrixRM x = MatrixRM::Zero(3, 10);
  x(2, 7) = std::numeric_limits<double>::infinity();
  try {
    f.process(x);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("channel 2") != std::string::npos);
    CHECK(msg.find("index 7") != std::string::npos);
  }
}

TEST_CASE("filter_forward: channel mismatch rejected") {
  BiquadFilter f(design_notch(50.0, 4.0, 250.0), 2);
  MatrixRM x = MatrixRM::Zero(3, 10);
  CHECK_THROWS_AS(f.process(x), NumericError);
}

TEST_CASE("linearity and time invariance on random input") {
  const auto chain = design_preprocessing_chain(250.0);
  const auto xa = oracles::white_noise(2000, 21);
  const auto xb = oracles::white_noise(2000, 22);

  const double alpha = 1.7, beta = -0.4;
  std::vector<double> mix(2000);
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix[i] = alpha * xa[i] + beta * xb[i];

  const auto ya = filter_signal(chain, xa);
  const auto yb = filter_signal(chain, xb);
  const auto ym = filter_signal(chain, mix);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double want = alpha * ya[i] + beta * yb[i];
    num += (ym[i] - want) * (ym[i] - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) < 1e-9);

  // time invariance: delayed input produces the identically delayed output
  const std::size_t shift = 97;
  std::vector<double> delayed(2000 + shift, 0.0);
  for (std::size_t i = 0; i < xa.size(); ++i) delayed[i + shift] = xa[i];
  const auto yd = filter_signal(chain, delayed);
  for (std::size_t i = 0; i < xa.size(); ++i)
    CHECK(yd[i + shift] == doctest::Approx(ya[i]).epsilon(1e-9));
}

// -------------------------------------------------------------- resample

TEST_CASE("resample 250->32: 3000 samples -> exactly 384") {
  const auto y = resample_to_32hz(oracles::white_noise(3000, 4));
  CHECK(y.size() == 384);
  CHECK_THROWS_AS(resample_to_32hz(oracles::white_noise(3001, 4)),
                  NumericError);
}

TEST_CASE("resample preserves constants exactly") {
  std::vector<double> c(3000, 3.25);
  const auto y = resample_to_32hz(c);
  for (double v : y) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("resample preserves a 5 Hz sinusoid") {
  const auto x = oracles::sine(6000, 250.0, 5.0);  // 24 s
  const auto y = resample_to_32hz(x);
  REQUIRE(y.size() == 768);
  // fit at 32 Hz, skipping the filter edge transients
  const double amp = oracles::fit_sinusoid_amplitude(y, 32.0, 5.0, 64);
  CHECK(amp == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("resample recording wrapper") {
  Recording rec;
  rec.fs_hz = 250.0;
  rec.channels = {"a", "b"};
  rec.data.setOnes(2, 3000);
  const auto out = resample_to_32hz(rec);
  CHECK(out.fs_hz == 32.0);
  CHECK(out.n_samples() == 384);
}

// ----------------------------------------------------------------- welch

TEST_CASE("welch: pure 10 Hz tone concentrates at the peak") {
  const auto x = oracles::sine(5000, 250.0, 10.0);
  const auto s = welch_psd(x, 250.0);
  // argmax at 10 Hz
  std::size_t kmax = 0;
  for (std::size_t k = 1; k < s.power.size(); ++k)
    if (s.power[k] > s.power[kmax]) kmax = k;
  CHECK(s.freqs_hz[kmax] == doctest::Approx(10.0).epsilon(1e-9));
  // peak +- one bin holds nearly everything (window-adjusted)
  const double df = s.df();
  const double peak3 = s.band_power(10.0 - 1.5 * df, 10.0 + 1.5 * df);
  CHECK(peak3 / s.total_power() >= 0.90);
}

TEST_CASE("welch: white noise is flat within 3 dB over a 100-average run") {
  const int seg = 256;
  const auto x = oracles::white_noise(seg * 51, 123);  // ~100 segments at 50%
  const auto s = welch_psd(x, 250.0, seg);
  double mean = 0.0;
  int n = 0;
  for (std::size_t k = 2; k + 1 < s.power.size(); ++k) {
    mean += s.power[k];
    ++n;
  }
  mean /= n;
  for (std::size_t k = 2; k + 1 < s.power.size(); ++k) {
    const double dev_db = 10.0 * std::log10(s.power[k] / mean);
    CHECK(std::abs(dev_db) <= 3.0);
  }
}

TEST_CASE("welch: parseval consistency for zero-mean white noise") {
  const auto x = oracles::white_noise(50000, 321, 2.0);
  double var = 0.0, mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());

  const auto s = welch_psd(x, 250.0);
  CHECK(s.total_power() == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("welch: zero input, zero power; empty input errors") {
  std::vector<double> z(1000, 0.0);
  const auto s = welch_psd(z, 250.0);
  for (double p : s.power) CHECK(p == 0.0);
  CHECK(s.freqs_hz.front() == 0.0);
  CHECK(s.freqs_hz.back() == doctest::Approx(125.0));
  CHECK_THROWS_AS(welch_psd(std::vector<double>{}, 250.0), NumericError);
}

TEST_CASE("filter-design coefficient dump format has 17 significant digits") {
  const auto bp = design_butterworth_bandpass(4, 0.004, 0.4);
  char buf[256];
  const auto& s = bp.sections()[0];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g", s.b0, s.b1,
                s.b2, s.a1, s.a2);
  // parse back and compare bit-exactly
  double b0, b1, b2, a1, a2;
  REQUIRE(std::sscanf(buf, "%lf %lf %lf %lf %lf", &b0, &b1, &b2, &a1, &a2) ==
          5);
  CHECK(b0 == s.b0);
  CHECK(a2 == s.a2);
}
