#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "neo/artifact/classify.hpp"
#include "neo/artifact/features.hpp"
#include "neo/artifact/ica.hpp"
#include "neo/montage.hpp"
#include "oracles.hpp"

using namespace neo;
using namespace neo::ica;

namespace {

// 4 super-Gaussian + 4 sub-Gaussian unit-variance sources
Eigen::MatrixXd synthetic_sources(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  std::exponential_distribution<double> e(std::numbers::sqrt2);
  std::bernoulli_distribution coin;
  Eigen::MatrixXd s(8, n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 4; ++c)  // laplacian, unit variance
      s(c, i) = (coin(rng) ? 1.0 : -1.0) * e(rng);
    for (int c = 4; c < 8; ++c) s(c, i) = u(rng);
  }
  return s;
}

Eigen::MatrixXd random_mixing(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (;;) {
    Eigen::MatrixXd a(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) a(i, j) = g(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    if (svd.singularValues()(0) / svd.singularValues()(7) < 100.0) return a;
  }
}

// blink + spike-wave + floor-noise scene over 8 referential channels
struct Scene {
  Eigen::MatrixXd x;
  Eigen::VectorXd blink_pattern;
  Eigen::VectorXd seizure_pattern;
};

Scene blink_seizure_scene(int n, std::uint64_t seed, double fs = 250.0,
                          bool with_seizure = true) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin;
  std::exponential_distribution<double> e(std::numbers::sqrt2);

  Scene sc;
  sc.x.setZero(8, n);
  // mildly super-Gaussian floor noise, independent per channel
  for (int c = 0; c < 8; ++c)
    for (int i = 0; i < n; ++i)
      sc.x(c, i) = 4.0 * (coin(rng) ? 1.0 : -1.0) * e(rng);
  // plus a common 10 Hz rhythm on the occipitals so retention has structure
  for (int i = 0; i < n; ++i) {
    const double v = 8.0 * std::sin(2.0 * std::numbers::pi * 10.0 * i / fs);
    sc.x(6, i) += v;        // O1
    sc.x(7, i) += 0.9 * v;  // O2
  }

  // blink pulses on the frontal channels
  sc.blink_pattern.setZero(8);
  sc.blink_pattern << 1.0, 0.93, 0.12, 0.12, 0.0, 0.0, 0.0, 0.0;
  std::uniform_real_distribution<double> when(0.0, n / fs - 0.5);
  const int pulses = std::max(6, static_cast<int>(n / fs / 6.0));
  for (int p = 0; p < pulses; ++p) {
    const double t0 = when(rng);
    for (int i = static_cast<int>(t0 * fs);
         i < static_cast<int>((t0 + 0.35) * fs) && i < n; ++i) {
      const double u = (i / fs - t0) / 0.35;
      const double shape = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
      for (int c = 0; c < 8; ++c)
        sc.x(c, i) += 150.0 * shape * sc.blink_pattern(c);
    }
  }

  // 3 Hz spike-wave on the centrals/temporals
  sc.seizure_pattern.setZero(8);
  sc.seizure_pattern << 0.0, 0.0, 1.0, 0.94, 0.55, 0.5, 0.0, 0.0;
  if (with_seizure) {
    for (int i = 0; i < n; ++i) {
      const double t = i / fs;
      const double ph = t * 3.0 - std::floor(t * 3.0);
      const double spike = std::exp(-0.5 * std::pow((ph - 0.15) / 0.05, 2.0));
      const double wave =
          ph > 0.3 ? std::sin(std::numbers::pi * (ph - 0.3) / 0.7) : 0.0;
      const double v = 90.0 * (-1.1 * spike + 0.8 * wave);
      for (int c = 0; c < 8; ++c) sc.x(c, i) += v * sc.seizure_pattern(c);
    }
  }
  return sc;
}

double band_power_of(std::span<const double> x, double fs, double lo,
                     double hi) {
  return neo::dsp::welch_psd(x, fs).band_power(lo, hi);
}

std::vector<double> row_of(const Eigen::MatrixXd& m, int r) {
  return std::vector<double>(m.row(r).begin(), m.row(r).end());
}

}  // namespace

TEST_CASE("ica recovers a random mixing of 8 sources (amari < 0.1)") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto s = synthetic_sources(15000, seed);
    const auto a_true = random_mixing(seed + 100);
    const Eigen::MatrixXd x = a_true * s;
    IcaConfig cfg;
    cfg.seed = seed;
    const auto model = fit_ica(x, cfg);
    const double amari = oracles::amari_index(model.unmixing() * a_true);
    CHECK(amari < 0.1);
    CHECK(model.iterations > 0);
  }
}

TEST_CASE("ica on identity mixing converges to a scaled permutation") {
  const auto s = synthetic_sources(15000, 9);
  const auto model = fit_ica(s, {});
  CHECK(oracles::amari_index(model.unmixing()) < 0.1);
}

TEST_CASE("ica kurtosis signs split super from sub sources") {
  const auto s = synthetic_sources(15000, 12);
  const auto model = fit_ica(s, {});
  int super = 0;
  for (auto k : model.source_signs)
    if (k == KurtosisSign::super) ++super;
  CHECK(super == 4);
}

TEST_CASE("ica rejects rank-deficient input") {
  auto s = synthetic_sources(4000, 4);
  s.row(3).setZero();  // flat channel
  CHECK_THROWS_AS(fit_ica(s, {}), NumericError);
  auto dup = synthetic_sources(4000, 5);
  dup.row(2) = dup.row(1);  // duplicated channel
  CHECK_THROWS_AS(fit_ica(dup, {}), NumericError);
}

TEST_CASE("ica rejects too-short windows") {
  const auto s = synthetic_sources(100, 6);
  CHECK_THROWS_AS(fit_ica(s, {}), NumericError);
}

TEST_CASE("ica model algebra: W*A identity, round-trip reconstruction") {
  const auto s = synthetic_sources(8000, 21);
  const auto a_true = random_mixing(22);
  const Eigen::MatrixXd x = a_true * s;
  const auto model = fit_ica(x, {});

  const Eigen::MatrixXd ident = model.unmixing() * model.mixing();
  CHECK((ident - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <
        1e-6);

  const auto acts = transform(model, x);
  const auto back = inverse_transform(model, acts);
  CHECK((back - x).norm() / x.norm() < 1e-6);

  // zero (mean-level) input maps to zero activations
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(8, 100);
  const auto zacts = transform(model, zeros.colwise() + model.means);
  CHECK(zacts.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single strong source dominates one activation row") {
  // sparse burst train (strongly super-Gaussian) over a gaussian floor
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  const int n = 10000;
  Eigen::MatrixXd x(8, n);
  Eigen::VectorXd pattern(8);
  pattern << 1.0, 0.8, 0.3, 0.25, 0.6, 0.55, 0.1, 0.12;
  for (int i = 0; i < n; ++i) {
    const double t = i / 250.0;
    const double ph = t / 0.8 - std::floor(t / 0.8);
    const double src =
        100.0 * std::exp(-0.5 * std::pow((ph - 0.5) / 0.03, 2.0));
    for (int c = 0; c < 8; ++c) x(c, i) = pattern(c) * src + g(rng);
  }
  const auto model = fit_ica(x, {});
  const auto acts = transform(model, x);
  std::vector<double> energy;
  for (int c = 0; c < 8; ++c) energy.push_back(acts.row(c).squaredNorm());
  std::sort(energy.begin(), energy.end(), std::greater<>());
  CHECK(energy[0] / energy[1] > 10.0);
}

TEST_CASE("ica determinism under a fixed seed") {
  const auto s = synthetic_sources(6000, 41);
  const auto a_true = random_mixing(42);
  const Eigen::MatrixXd x = a_true * s;
  IcaConfig cfg;
  cfg.seed = 77;
  const auto m1 = fit_ica(x, cfg);
  const auto m2 = fit_ica(x, cfg);
  CHECK((m1.rotation - m2.rotation).cwiseAbs().maxCoeff() == 0.0);
}

// -------------------------------------------------------------- features

TEST_CASE("topomap peaks at the indicator electrode") {
  const auto montage = MontageGraph::standard_reduced();
  const auto& es = montage.electrodes();
  std::vector<std::string> labels = montage.raw_channels();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  w(0) = 1.0;  // Fp1
  const auto map = interpolate_topomap(es, labels, w);

  int best_r = 0, best_c = 0;
  double best = -1e300;
  for (int r = 0; r < kTopomapGrid; ++r)
    for (int c = 0; c < kTopomapGrid; ++c)
      if (map(r, c) > best) {
        best = map(r, c);
        best_r = r;
        best_c = c;
      }
  const auto [fx, fy] = es.position("Fp1");
  const int want_c = static_cast<int>((fx + 1.0) / 2.0 * kTopomapGrid);
  const int want_r = static_cast<int>((1.0 - fy) / 2.0 * kTopomapGrid);
  CHECK(std::abs(best_r - want_r) <= 1);
  CHECK(std::abs(best_c - want_c) <= 1);
  CHECK(map.allFinite());
}

TEST_CASE("feature scalars: 50 Hz line ratio and gaussian kurtosis") {
  const auto montage = MontageGraph::standard_reduced();
  const auto scene = blink_seizure_scene(15000, 51, 250.0, false);
  const auto model = fit_ica(scene.x, {});

  // synthesize activations directly for the scalar checks
  Eigen::MatrixXd acts = transform(model, scene.x);
  for (int i = 0; i < acts.cols(); ++i)
    acts(0, i) = 20.0 * std::sin(2.0 * std::numbers::pi * 50.0 * i / 250.0);
  const auto f_line = extract_features(model, acts, 0, montage, 250.0);
  CHECK(f_line.line_band_ratio > 0.8);

  auto noise = oracles::white_noise(15000, 3);
  for (int i = 0; i < acts.cols(); ++i)
    acts(1, i) = noise[static_cast<std::size_t>(i)];
  const auto f_gauss = extract_features(model, acts, 1, montage, 250.0);
  CHECK(std::abs(f_gauss.kurtosis_excess) < 0.5);
  CHECK(f_gauss.psd.power.size() > 0);
  CHECK(f_gauss.waveform.size() == 15000);
}

TEST_CASE("excess kurtosis oracle values") {
  auto gauss = oracles::white_noise(15000, 5);
  CHECK(std::abs(excess_kurtosis(gauss)) < 0.5);
  std::vector<double> spiky(15000, 0.0);
  for (int i = 0; i < 15000; i += 100)
    spiky[static_cast<std::size_t>(i)] = 10.0;
  CHECK(excess_kurtosis(spiky) > 8.0);
}

// -------------------------------------------------------------- classify

TEST_CASE("rules: pure line component labeled artifactual") {
  ComponentFeatures f;
  f.line_band_ratio = 0.9;
  f.kurtosis_excess = 0.0;
  f.low_band_ratio = 0.1;
  f.frontal_dominance = 0.1;
  RuleBasedClassifier cls;
  const auto label = cls.classify(f);
  CHECK(label.label == ComponentClass::artifactual);
  CHECK(label.confidence >= 0.5);
  CHECK(label.rationale.find("line") != std::string::npos);
}

TEST_CASE("rules: central spike-wave profile stays non-artifactual") {
  ComponentFeatures f;
  f.kurtosis_excess = 5.0;     // moderate
  f.low_band_ratio = 0.85;     // 3 Hz content is low-band
  f.line_band_ratio = 0.02;
  f.frontal_dominance = 0.08;  // central topography
  RuleBasedClassifier cls;
  CHECK(cls.classify(f).label == ComponentClass::non_artifactual);
}

TEST_CASE("rules: frontal high-kurtosis component is a blink") {
  ComponentFeatures f;
  f.kurtosis_excess = 20.0;
  f.low_band_ratio = 0.8;
  f.line_band_ratio = 0.01;
  f.frontal_dominance = 0.8;
  RuleBasedClassifier cls;
  const auto label = cls.classify(f);
  CHECK(label.label == ComponentClass::artifactual);
  CHECK(label.confidence > 0.5);
}

TEST_CASE("rules: all-zero features -> non-artifactual at the floor") {
  ComponentFeatures f;
  RuleBasedClassifier cls;
  const auto label = cls.classify(f);
  CHECK(label.label == ComponentClass::non_artifactual);
  CHECK(label.confidence >= 0.5);
}

TEST_CASE("linear classifier behind the same interface") {
  detect::WeightContainer wc;
  const float w[4] = {0.0f, 0.0f, 10.0f, 0.0f};
  const float b[1] = {-5.0f};
  wc.add_tensor("classifier/w", {4}, std::span<const float>(w, 4));
  wc.add_tensor("classifier/b", {1}, std::span<const float>(b, 1));
  const auto cls = LinearClassifier::from_container(wc);

  ComponentFeatures line;
  line.line_band_ratio = 0.9;
  CHECK(cls.classify(line).label == ComponentClass::artifactual);
  ComponentFeatures quiet;
  quiet.line_band_ratio = 0.1;
  CHECK(cls.classify(quiet).label == ComponentClass::non_artifactual);
}

// -------------------------------------------------- remove_artifacts

TEST_CASE("cleaning with no artifactual labels is the identity") {
  const auto scene = blink_seizure_scene(15000, 61);
  const auto model = fit_ica(scene.x, {});
  std::vector<ComponentLabel> labels(8);  // all non-artifactual
  const auto cleaned = remove_artifacts(scene.x, labels, model);
  CHECK((cleaned - scene.x).norm() / scene.x.norm() < 1e-6);
}

TEST_CASE("blink removal: frontal low band drops, occipital rhythm stays") {
  const auto montage = MontageGraph::standard_reduced();
  const auto scene = blink_seizure_scene(30000, 71, 250.0, false);
  IcaConfig cfg;
  cfg.seed = 71;
  const auto model = fit_ica(scene.x, cfg);
  const auto acts = transform(model, scene.x);

  RuleBasedClassifier cls;
  std::vector<ComponentLabel> labels;
  for (int c = 0; c < 8; ++c)
    labels.push_back(
        cls.classify(extract_features(model, acts, c, montage, 250.0)));
  const auto cleaned = remove_artifacts(scene.x, labels, model);

  const auto fp1_before = row_of(scene.x, 0);
  std::vector<double> fp1_after(cleaned.row(0).begin(), cleaned.row(0).end());
  const double p_before = band_power_of(fp1_before, 250.0, 0.5, 4.0);
  const double p_after = band_power_of(fp1_after, 250.0, 0.5, 4.0);
  CHECK(p_after <= 0.2 * p_before);  // >= 80% reduction

  const auto o1_before = row_of(scene.x, 6);
  std::vector<double> o1_after(cleaned.row(6).begin(), cleaned.row(6).end());
  const double bg_before = band_power_of(o1_before, 250.0, 5.0, 15.0);
  const double bg_after = band_power_of(o1_after, 250.0, 5.0, 15.0);
  CHECK(std::abs(bg_after - bg_before) <= 0.10 * bg_before);
}

TEST_CASE("seizure band power survives blink cleaning") {
  const auto montage = MontageGraph::standard_reduced();
  const auto scene = blink_seizure_scene(30000, 81, 250.0, true);
  IcaConfig cfg;
  cfg.seed = 81;
  const auto model = fit_ica(scene.x, cfg);
  const auto acts = transform(model, scene.x);

  RuleBasedClassifier cls;
  std::vector<ComponentLabel> labels;
  int artifactual = 0;
  for (int c = 0; c < 8; ++c) {
    labels.push_back(
        cls.classify(extract_features(model, acts, c, montage, 250.0)));
    if (labels.back().label == ComponentClass::artifactual) ++artifactual;
  }
  CHECK(artifactual >= 1);  // the blink must be caught
  const auto cleaned = remove_artifacts(scene.x, labels, model);

  const auto c3_before = row_of(scene.x, 2);
  std::vector<double> c3_after(cleaned.row(2).begin(), cleaned.row(2).end());
  const double sz_before = band_power_of(c3_before, 250.0, 2.5, 3.5);
  const double sz_after = band_power_of(c3_after, 250.0, 2.5, 3.5);
  CHECK(sz_after >= 0.9 * sz_before);

  const auto fp1_before = row_of(scene.x, 0);
  std::vector<double> fp1_after(cleaned.row(0).begin(), cleaned.row(0).end());
  CHECK(band_power_of(fp1_after, 250.0, 0.5, 4.0) <=
        0.2 * band_power_of(fp1_before, 250.0, 0.5, 4.0));
}

TEST_CASE("removing components never raises total energy") {
  std::mt19937_64 rng(91);
  const auto scene = blink_seizure_scene(20000, 91);
  const auto model = fit_ica(scene.x, {});
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<ComponentLabel> labels(8);
    for (auto& l : labels)
      l.label = (rng() & 1) ? ComponentClass::artifactual
                            : ComponentClass::non_artifactual;
    const auto cleaned = remove_artifacts(scene.x, labels, model);
    const Eigen::MatrixXd c0 = scene.x.colwise() - model.means;
    const Eigen::MatrixXd c1 = cleaned.colwise() - model.means;
    CHECK(c1.squaredNorm() <= c0.squaredNorm() * (1.0 + 1e-9) + 1e-9);
  }
}
