#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "neo/analysis/quality.hpp"
#include "neo/artifact/classify.hpp"
#include "neo/artifact/features.hpp"
#include "neo/artifact/ica.hpp"
#include "neo/detector/gradcam.hpp"
#include "neo/detector/model.hpp"
#include "neo/dsp/design.hpp"
#include "neo/epochs.hpp"
#include "neo/montage.hpp"
#include "neo/stream/edf.hpp"
#include "neo/stream/session.hpp"

namespace neomon {

using namespace neo;
namespace fs = std::filesystem;

namespace {

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct LoadedFile {
  Recording rec;
  std::vector<AnnotationSpan> annotations;
};

LoadedFile load_recording(const std::string& path) {
  LoadedFile out;
  if (has_suffix(path, ".edf")) {
    out.rec = stream::read_edf(path);
  } else {
    auto data = stream::read_session(path);
    out.rec = std::move(data.recording);
    out.annotations = std::move(data.annotations);
    if (data.truncated_tail)
      std::fprintf(stderr, "note: %s had a truncated final chunk\n",
                   path.c_str());
  }
  return out;
}

std::vector<AnnotationSpan> read_annotation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations: " + path);
  std::vector<AnnotationSpan> spans;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    AnnotationSpan s;
    if (!(ls >> s.t0_s >> s.t1_s >> s.label))
      throw IoError("annotations: malformed line '" + line + "' in " + path);
    spans.push_back(s);
  }
  return spans;
}

MontageGraph montage_from(const AppConfig& app, const std::string& flag) {
  const std::string& path = !flag.empty() ? flag : app.montage_file;
  if (path.empty()) return MontageGraph::standard_reduced();
  return MontageGraph::from_config_file(path);
}

std::shared_ptr<const detect::WeightContainer> weights_from(
    const AppConfig& app, const std::string& flag, const MontageGraph& m) {
  const std::string& path = !flag.empty() ? flag : app.weights;
  if (path.empty()) {
    std::fprintf(stderr,
                 "note: no weight container given; using seeded random "
                 "weights (structural mode, not a trained detector)\n");
    return std::make_shared<detect::WeightContainer>(
        detect::WeightContainer::random(detect::ModelConfig::reference(), m,
                                        1));
  }
  return std::make_shared<detect::WeightContainer>(
      detect::WeightContainer::load(path));
}

/// Referential 8-channel recordings are derived to bipolar; 12-channel
/// inputs are taken as already-bipolar in montage order.
Recording to_bipolar(const Recording& rec, const MontageGraph& m) {
  if (rec.n_channels() == static_cast<Eigen::Index>(m.raw_channels().size()))
    return derive_bipolar(rec, m);
  if (rec.n_channels() == m.n_channels()) return rec;
  throw NumericError("input must have 8 referential or 12 bipolar channels, "
                     "got " + std::to_string(rec.n_channels()));
}

void write_relevance(std::ofstream& out, double t_start_s,
                     const detect::Relevance& rel,
                     const std::vector<std::string>& names) {
  out << "# t=" << t_start_s << "\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    out << names[i] << '\t' << rel.channel_scores[i] << '\n';
  out << "temporal";
  for (double v : rel.temporal_scores) out << '\t' << v;
  out << '\n';
}

}  // namespace

int cmd_detect(const AppConfig& app, const DetectOpts& opts) {
  const auto montage = montage_from(app, opts.montage_file);
  const auto weights = weights_from(app, opts.weights, montage);
  const auto loaded = load_recording(opts.input);
  if (std::abs(loaded.rec.fs_hz - kDeviceRateHz) > 1e-9)
    throw NumericError("detect: expected a 250 Hz recording, got " +
                       std::to_string(loaded.rec.fs_hz) + " Hz");
  const Recording bipolar = to_bipolar(loaded.rec, montage);

  detect::CnnGatModel model(weights, montage);
  const auto names = montage.channel_names();
  const double threshold = opts.threshold >= 0 ? opts.threshold
                                               : app.threshold;

  std::ofstream rel_out;
  if (!opts.relevance_out.empty()) {
    rel_out.open(opts.relevance_out);
    if (!rel_out) throw IoError("cannot write " + opts.relevance_out);
  }

  SeizureEventDetector events(threshold, opts.hop_s);
  const int hop = static_cast<int>(opts.hop_s * kDeviceRateHz);
  const auto window = static_cast<Eigen::Index>(12 * kDeviceRateHz);
  for (Eigen::Index start = 0; start + window <= bipolar.n_samples();
       start += hop) {
    const MatrixRM raw = bipolar.data.middleCols(start, window);
    const double t_start_s = static_cast<double>(start) / kDeviceRateHz;
    const auto epoch = model.preprocess(
        raw, static_cast<std::uint64_t>(t_start_s * 1e6));
    const auto fwd = model.forward(epoch);
    const auto rel = detect::grad_cam(model, fwd);
    const auto top = rel.top_channels(3);
    std::string top_s;
    for (std::size_t i = 0; i < top.size(); ++i) {
      if (i) top_s += ',';
      top_s += names[static_cast<std::size_t>(top[i])];
    }
    std::printf("%.1f %.6f %s\n", t_start_s, fwd.probability, top_s.c_str());
    if (rel_out.is_open()) write_relevance(rel_out, t_start_s, rel, names);
    if (auto ev = events.push({t_start_s, fwd.probability}))
      std::printf("EVENT seizure t=%.1f mean_p=%.3f epochs=%d\n",
                  ev->t_start_s, ev->mean_prob, ev->n_epochs);
  }
  return 0;
}

int cmd_clean(const AppConfig& app, const CleanOpts& opts) {
  (void)app;
  const auto loaded = load_recording(opts.input);
  const auto& rec = loaded.rec;
  if (rec.n_channels() != kAdcChannels)
    throw NumericError("clean: expected the 8 referential channels, got " +
                       std::to_string(rec.n_channels()));

  const auto montage = MontageGraph::standard_reduced();
  const double fs = rec.fs_hz;
  const auto win = static_cast<Eigen::Index>(opts.window_s * fs);
  const Eigen::Index min_fit = kAdcChannels * 20 * kAdcChannels;

  std::ofstream report;
  if (!opts.report_out.empty()) {
    report.open(opts.report_out);
    if (!report) throw IoError("cannot write " + opts.report_out);
    report << "window_t0\tcomponent\tlabel\tconfidence\tkurtosis\t"
              "low_band\tline_band\tfrontal\trationale\n";
  }

  Recording cleaned = rec;
  ica::RuleBasedClassifier classifier;
  std::optional<ica::IcaModel> last_model;

  for (Eigen::Index start = 0; start < rec.n_samples();
       start += win > 0 ? win : rec.n_samples()) {
    const auto len = std::min<Eigen::Index>(win, rec.n_samples() - start);
    const Eigen::MatrixXd x = rec.data.middleCols(start, len);

    const ica::IcaModel* model = nullptr;
    ica::IcaModel fitted;
    if (len >= min_fit) {
      ica::IcaConfig icfg;
      icfg.seed = opts.seed;
      fitted = ica::fit_ica(x, icfg);
      if (!fitted.converged)
        std::fprintf(stderr, "note: window at %.1f s did not converge "
                             "(wchange %.2e)\n",
                     static_cast<double>(start) / fs, fitted.final_wchange);
      last_model = fitted;
      model = &*last_model;
    } else if (last_model) {
      std::fprintf(stderr,
                   "note: window at %.1f s too short to fit; cleaning with "
                   "the previous (stale) model\n",
                   static_cast<double>(start) / fs);
      model = &*last_model;
    } else {
      std::fprintf(stderr, "note: window at %.1f s too short; left as is\n",
                   static_cast<double>(start) / fs);
      continue;
    }

    const auto acts = ica::transform(*model, x);
    std::vector<ica::ComponentLabel> labels;
    for (int c = 0; c < kAdcChannels; ++c) {
      const auto f = ica::extract_features(*model, acts, c, montage, fs);
      auto label = classifier.classify(f);
      labels.push_back(label);
      if (report.is_open())
        report << static_cast<double>(start) / fs << '\t' << c << '\t'
               << (label.label == ica::ComponentClass::artifactual
                       ? "artifactual"
                       : "non-artifactual")
               << '\t' << label.confidence << '\t' << f.kurtosis_excess
               << '\t' << f.low_band_ratio << '\t' << f.line_band_ratio
               << '\t' << f.frontal_dominance << '\t' << label.rationale
               << '\n';
    }
    cleaned.data.middleCols(start, len) =
        ica::remove_artifacts(x, labels, *model);
  }

  if (has_suffix(opts.out, ".edf")) {
    stream::write_edf(opts.out, cleaned);
  } else {
    stream::SessionHeader hdr;
    hdr.fs_hz = cleaned.fs_hz;
    hdr.channels = cleaned.channels;
    hdr.meta = cleaned.meta;
    stream::SessionWriter w(opts.out, hdr);
    for (Eigen::Index i = 0; i < cleaned.n_samples(); ++i) {
      std::vector<double> uv(static_cast<std::size_t>(cleaned.n_channels()));
      for (Eigen::Index c = 0; c < cleaned.n_channels(); ++c)
        uv[static_cast<std::size_t>(c)] = cleaned.data(c, i);
      w.push_frame_uv(uv);
    }
    for (const auto& a : loaded.annotations) w.annotate(a);
    w.close();
  }
  std::printf("cleaned samples=%lld -> %s\n",
              static_cast<long long>(cleaned.n_samples()), opts.out.c_str());
  return 0;
}

int cmd_analyze(const AppConfig& app, const AnalyzeOpts& opts) {
  (void)app;
  const auto a = load_recording(opts.file_a);
  const auto b = load_recording(opts.file_b);
  const auto states = read_annotation_file(opts.states);

  const auto report = analysis::state_report(a.rec, b.rec, states);
  const auto text = analysis::render_report(report);
  if (opts.report_out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(opts.report_out);
    if (!out) throw IoError("cannot write " + opts.report_out);
    out << text;
    std::printf("report -> %s\n", opts.report_out.c_str());
  }

  if (!opts.spectra_prefix.empty()) {
    for (const auto& sp : report.spectra) {
      const auto path = opts.spectra_prefix + "_" + sp.state + ".tsv";
      std::ofstream out(path);
      if (!out) throw IoError("cannot write " + path);
      out << "freq_hz\tpower_a\tpower_b\n";
      for (std::size_t k = 0; k < sp.device_a.freqs_hz.size(); ++k)
        out << sp.device_a.freqs_hz[k] << '\t' << sp.device_a.power[k] << '\t'
            << sp.device_b.power[k] << '\n';
    }
  }
  return 0;
}

int cmd_prepare(const AppConfig& app, const PrepareOpts& opts) {
  (void)app;
  if (!fs::exists(opts.edf_dir) || !fs::is_directory(opts.edf_dir))
    throw IoError("prepare: not a directory: " + opts.edf_dir);
  const auto montage = MontageGraph::standard_reduced();

  std::vector<fs::path> edfs;
  for (const auto& e : fs::directory_iterator(opts.edf_dir))
    if (e.is_regular_file() && e.path().extension() == ".edf")
      edfs.push_back(e.path());
  std::sort(edfs.begin(), edfs.end());

  std::vector<float> epoch_data;
  std::vector<float> label_data;
  int positives = 0, negatives = 0;

  for (const auto& path : edfs) {
    const auto rec = stream::read_edf(path.string());
    if (std::abs(rec.fs_hz - kDeviceRateHz) > 1e-9) {
      std::fprintf(stderr, "skip %s: fs %.1f != 250\n", path.c_str(),
                   rec.fs_hz);
      continue;
    }
    const Recording bipolar = to_bipolar(rec, montage);

    fs::path ann = path;
    ann.replace_extension(".ann");
    if (!opts.annotations_dir.empty())
      ann = fs::path(opts.annotations_dir) / ann.filename();
    SecondMask mask(static_cast<std::size_t>(bipolar.duration_s()), false);
    if (fs::exists(ann)) {
      const auto spans = read_annotation_file(ann.string());
      mask = mask_from_spans(spans, bipolar.duration_s());
    }

    SegmentConfig scfg;
    scfg.mode = opts.stream_mode ? SegmentMode::stream : SegmentMode::train;
    scfg.stream_hop_s = opts.hop_s;
    const int dur = static_cast<int>(bipolar.duration_s());
    for (int t : window_starts(mask, dur, scfg)) {
      const MatrixRM raw = bipolar.data.middleCols(
          static_cast<Eigen::Index>(t) * 250, 3000);
      const auto epoch = detect::preprocess_for_model(raw, true);
      for (int c = 0; c < kMontageChannels; ++c)
        for (int i = 0; i < kEpochSamples; ++i)
          epoch_data.push_back(static_cast<float>(epoch.data(c, i)));
      const double sz = seizure_seconds_in_window(mask, t);
      const auto label = make_epoch_label(sz);
      label_data.push_back(label.label == SeizureClass::seizure ? 1.0f : 0.0f);
      (label.label == SeizureClass::seizure ? positives : negatives) += 1;
    }
  }

  const int n = positives + negatives;
  detect::WeightContainer out;
  out.add_tensor("epochs", {n, kMontageChannels, kEpochSamples}, epoch_data,
                 false);
  out.add_tensor("labels", {n}, label_data, false);
  out.save(opts.out);
  std::printf("files=%zu epochs=%d positive=%d negative=%d -> %s\n",
              edfs.size(), n, positives, negatives, opts.out.c_str());
  return 0;
}

int cmd_filter_design(const FilterDesignOpts& opts) {
  dsp::BiquadCascade cascade;
  if (opts.type == "butterworth-bandpass") {
    if (opts.fs > 0) {
      cascade = dsp::design_butterworth_bandpass_hz(opts.order, opts.lo,
                                                    opts.hi, opts.fs);
    } else {
      double lo = opts.lo, hi = opts.hi;
      if (opts.nyquist_edges) {
        lo /= 2.0;
        hi /= 2.0;
      }
      cascade = dsp::design_butterworth_bandpass(opts.order, lo, hi);
    }
  } else if (opts.type == "notch") {
    if (opts.fs <= 0) throw UsageError("notch requires --fs");
    cascade = dsp::design_notch(opts.center, opts.bw, opts.fs);
  } else if (opts.type == "cheby2-bandpass") {
    if (opts.fs <= 0) throw UsageError("cheby2-bandpass requires --fs");
    cascade = dsp::design_chebyshev2_bandpass(opts.order, opts.lo, opts.hi,
                                              opts.atten_db, opts.fs);
  } else {
    throw UsageError("filter-design: unknown type '" + opts.type + "'");
  }

  for (const auto& s : cascade.sections())
    std::printf("%.17g %.17g %.17g %.17g %.17g\n", s.b0, s.b1, s.b2, s.a1,
                s.a2);
  return 0;
}

}  // namespace neomon
