#include "neo/analysis/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "neo/dsp/biquad.hpp"
#include "neo/dsp/design.hpp"
#include "neo/errors.hpp"

namespace neo::analysis {

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = std::min(a.size(), b.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0 || sbb <= 0)
    throw NumericError("correlation: zero-variance input");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

CorrelationResult aligned_correlation(std::span<const double> a,
                                      std::span<const double> b, double fs_hz,
                                      double max_lag_s) {
  if (a.empty() || b.empty())
    throw NumericError("correlation: empty input");
  const int max_lag =
      static_cast<int>(std::lround(std::abs(max_lag_s) * fs_hz));

  double best_score = -std::numeric_limits<double>::infinity();
  int best_lag = 0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    // positive lag: b delayed w.r.t. a, compare a[i] with b[i + lag]
    const int a0 = std::max(0, -lag);
    const int b0 = std::max(0, lag);
    const auto n = static_cast<int>(
        std::min(a.size() - static_cast<std::size_t>(a0),
                 b.size() - static_cast<std::size_t>(b0)));
    if (n < 8) continue;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += a[static_cast<std::size_t>(a0 + i)] *
             b[static_cast<std::size_t>(b0 + i)];
    acc /= n;
    if (acc > best_score) {
      best_score = acc;
      best_lag = lag;
    }
  }

  const int a0 = std::max(0, -best_lag);
  const int b0 = std::max(0, best_lag);
  const auto n = std::min(a.size() - static_cast<std::size_t>(a0),
                          b.size() - static_cast<std::size_t>(b0));
  CorrelationResult out;
  out.r = pearson(a.subspan(static_cast<std::size_t>(a0), n),
                  b.subspan(static_cast<std::size_t>(b0), n));
  out.lag_s = best_lag / fs_hz;
  return out;
}

double snr_powerline_db(std::span<const double> x, double fs_hz) {
  if (fs_hz < 200.0)
    throw NumericError("snr_powerline: fs must be >= 200 Hz");
  const auto psd = dsp::welch_psd(x, fs_hz);
  const double noise = psd.band_power(48.0, 52.0);
  const double signal = psd.band_power(2.0, 90.0) - noise;
  // an empty noise band (to estimator precision) has no finite ratio
  if (noise <= 1e-12 * signal)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

double snr_alpha_db(std::span<const double> x, double fs_hz) {
  if (fs_hz < 64.0) throw NumericError("snr_alpha: fs must be >= 64 Hz");
  const auto psd = dsp::welch_psd(x, fs_hz);
  const double signal = psd.band_power(8.0, 13.0);
  const double noise = psd.band_power(2.0, 30.0) - signal;
  if (noise <= 1e-12 * signal)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

QualityReport state_report(const Recording& dev_a, const Recording& dev_b,
                           std::span<const AnnotationSpan> states,
                           const ReportConfig& cfg) {
  dev_a.validate();
  dev_b.validate();
  if (std::abs(dev_a.fs_hz - dev_b.fs_hz) > 1e-9)
    throw NumericError("state_report: sampling rates differ");
  const double fs = dev_a.fs_hz;
  const auto nch = std::min(dev_a.n_channels(), dev_b.n_channels());

  std::optional<dsp::BiquadCascade> band;
  if (cfg.prefilter_2_30)
    band = dsp::design_chebyshev2_bandpass(4, 2.0, 30.0, 40.0, fs);

  QualityReport report;
  std::mt19937_64 rng(cfg.seed);

  // group segments by state, preserving first-seen order
  std::vector<std::string> state_order;
  std::map<std::string, std::vector<AnnotationSpan>> by_state;
  for (const auto& s : states) {
    if (!by_state.count(s.label)) state_order.push_back(s.label);
    by_state[s.label].push_back(s);
  }

  std::vector<double> snr_pl_a, snr_pl_b, snr_al_a, snr_al_b;
  std::vector<std::vector<double>> pl_a_by_ch(static_cast<std::size_t>(nch)),
      pl_b_by_ch(static_cast<std::size_t>(nch)),
      al_a_by_ch(static_cast<std::size_t>(nch)),
      al_b_by_ch(static_cast<std::size_t>(nch));
  std::vector<double> pl_a_by_seg, pl_b_by_seg, al_a_by_seg, al_b_by_seg;

  for (const auto& state : state_order) {
    const auto& segs = by_state[state];
    std::vector<double> r_values;
    dsp::Spectrum spec_a, spec_b;
    int spec_count = 0;

    for (const auto& seg : segs) {
      const auto i0 = static_cast<Eigen::Index>(seg.t0_s * fs);
      const auto i1 = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(seg.t1_s * fs),
          std::min(dev_a.n_samples(), dev_b.n_samples()));
      const auto len = i1 - i0;
      if (len < static_cast<Eigen::Index>(fs)) continue;  // < 1 s: skip

      double seg_pl_a = 0, seg_pl_b = 0, seg_al_a = 0, seg_al_b = 0;
      int seg_n = 0;
      for (Eigen::Index ch = 0; ch < nch; ++ch) {
        std::vector<double> xa(dev_a.data.row(ch).segment(i0, len).begin(),
                               dev_a.data.row(ch).segment(i0, len).end());
        std::vector<double> xb(dev_b.data.row(ch).segment(i0, len).begin(),
                               dev_b.data.row(ch).segment(i0, len).end());

        std::vector<double> fa = xa, fb = xb;
        if (band) {
          fa = dsp::filter_signal(*band, xa);
          fb = dsp::filter_signal(*band, xb);
        }
        try {
          r_values.push_back(
              aligned_correlation(fa, fb, fs, cfg.max_lag_s).r);
        } catch (const NumericError&) {
          report.notices.push_back("zero-variance segment in state " + state);
        }

        const auto accum = [](std::vector<double>& dst, double v) {
          if (std::isfinite(v)) dst.push_back(v);
        };
        const double pa = snr_powerline_db(xa, fs);
        const double pb = snr_powerline_db(xb, fs);
        const double aa = snr_alpha_db(xa, fs);
        const double ab = snr_alpha_db(xb, fs);
        accum(snr_pl_a, pa);
        accum(snr_pl_b, pb);
        accum(snr_al_a, aa);
        accum(snr_al_b, ab);
        if (std::isfinite(pa)) pl_a_by_ch[static_cast<std::size_t>(ch)].push_back(pa);
        if (std::isfinite(pb)) pl_b_by_ch[static_cast<std::size_t>(ch)].push_back(pb);
        if (std::isfinite(aa)) al_a_by_ch[static_cast<std::size_t>(ch)].push_back(aa);
        if (std::isfinite(ab)) al_b_by_ch[static_cast<std::size_t>(ch)].push_back(ab);
        if (!std::isfinite(pa) || !std::isfinite(pb))
          report.notices.push_back("infinite powerline SNR (no 48-52 Hz "
                                   "power) in state " + state);
        seg_pl_a += pa; seg_pl_b += pb; seg_al_a += aa; seg_al_b += ab;
        ++seg_n;

        const auto psd_a = dsp::welch_psd(xa, fs);
        const auto psd_b = dsp::welch_psd(xb, fs);
        if (spec_count == 0) {
          spec_a = psd_a;
          spec_b = psd_b;
        } else if (psd_a.power.size() == spec_a.power.size()) {
          for (std::size_t k = 0; k < spec_a.power.size(); ++k) {
            spec_a.power[k] += psd_a.power[k];
            spec_b.power[k] += psd_b.power[k];
          }
        }
        ++spec_count;
      }
      if (seg_n > 0) {
        pl_a_by_seg.push_back(seg_pl_a / seg_n);
        pl_b_by_seg.push_back(seg_pl_b / seg_n);
        al_a_by_seg.push_back(seg_al_a / seg_n);
        al_b_by_seg.push_back(seg_al_b / seg_n);
      }
    }

    if (r_values.empty()) {
      report.notices.push_back("state " + state + " omitted: no usable segments");
      continue;
    }

    StateCorrelation sc;
    sc.state = state;
    sc.n_segments = static_cast<int>(segs.size());
    sc.n_values = static_cast<int>(r_values.size());
    double mean = 0.0;
    for (double r : r_values) mean += r;
    sc.mean_r = mean / static_cast<double>(r_values.size());

    // bootstrap CI of the mean
    std::vector<double> boots;
    boots.reserve(static_cast<std::size_t>(cfg.bootstrap));
    std::uniform_int_distribution<std::size_t> pick(0, r_values.size() - 1);
    for (int bi = 0; bi < cfg.bootstrap; ++bi) {
      double s = 0.0;
      for (std::size_t k = 0; k < r_values.size(); ++k) s += r_values[pick(rng)];
      boots.push_back(s / static_cast<double>(r_values.size()));
    }
    std::sort(boots.begin(), boots.end());
    sc.ci_lo = boots[static_cast<std::size_t>(0.025 * (boots.size() - 1))];
    sc.ci_hi = boots[static_cast<std::size_t>(0.975 * (boots.size() - 1))];
    report.correlations.push_back(sc);

    if (spec_count > 0) {
      for (auto& p : spec_a.power) p /= spec_count;
      for (auto& p : spec_b.power) p /= spec_count;
      report.spectra.push_back({state, spec_a, spec_b});
    }
  }

  const auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto mean_of_means = [&](const std::vector<std::vector<double>>& vv) {
    std::vector<double> m;
    for (const auto& v : vv)
      if (!v.empty()) m.push_back(mean_of(v));
    return mean_of(m);
  };

  DeviceQuality qa{"a", {}, {}}, qb{"b", {}, {}};
  qa.snr_powerline = {mean_of(snr_pl_a), mean_of_means(pl_a_by_ch),
                      mean_of(pl_a_by_seg)};
  qb.snr_powerline = {mean_of(snr_pl_b), mean_of_means(pl_b_by_ch),
                      mean_of(pl_b_by_seg)};
  qa.snr_alpha = {mean_of(snr_al_a), mean_of_means(al_a_by_ch),
                  mean_of(al_a_by_seg)};
  qb.snr_alpha = {mean_of(snr_al_b), mean_of_means(al_b_by_ch),
                  mean_of(al_b_by_seg)};
  report.devices = {qa, qb};
  return report;
}

std::string render_report(const QualityReport& report) {
  std::ostringstream os;
  os << "state\tsegments\tvalues\tmean_r\tci_lo\tci_hi\n";
  for (const auto& c : report.correlations)
    os << c.state << '\t' << c.n_segments << '\t' << c.n_values << '\t'
       << c.mean_r << '\t' << c.ci_lo << '\t' << c.ci_hi << '\n';
  os << "\ndevice\tsnr_powerline_db(all/ch/seg)\tsnr_alpha_db(all/ch/seg)\n";
  for (const auto& d : report.devices) {
    os << d.device << '\t' << d.snr_powerline.mean_over_all << '/'
       << d.snr_powerline.mean_over_channels << '/'
       << d.snr_powerline.mean_over_segments << '\t'
       << d.snr_alpha.mean_over_all << '/' << d.snr_alpha.mean_over_channels
       << '/' << d.snr_alpha.mean_over_segments << '\n';
  }
  for (const auto& n : report.notices) os << "# " << n << '\n';
  return os.str();
}

}  // namespace neo::analysis
