#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "neo/detector/gradcam.hpp"
#include "neo/detector/model.hpp"
#include "neo/detector/weights.hpp"
#include "neo/montage.hpp"
#include "oracles.hpp"

using namespace neo;
using namespace neo::detect;

namespace {

std::shared_ptr<const WeightContainer> ref_weights(std::uint64_t seed = 1) {
  static const auto montage = MontageGraph::standard_reduced();
  return std::make_shared<WeightContainer>(
      WeightContainer::random(ModelConfig::reference(), montage, seed));
}

Epoch random_epoch(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Epoch e;
  e.data.resize(12, 384);
  for (int c = 0; c < 12; ++c)
    for (int t = 0; t < 384; ++t) e.data(c, t) = g(rng);
  return e;
}

MatrixRM random_raw(std::uint64_t seed, double sigma = 20.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  MatrixRM raw(12, 3000);
  for (int c = 0; c < 12; ++c)
    for (int t = 0; t < 3000; ++t) raw(c, t) = g(rng);
  return raw;
}

// copy of `src` with the dense-head tensors zeroed
WeightContainer with_zero_head(const WeightContainer& src,
                               const MontageGraph& montage) {
  WeightContainer out;
  out.rebind_adjacency(montage);
  for (const auto& spec : architecture_tensors(src.config())) {
    const auto t = src.tensor(spec.name);
    std::vector<float> data(t.begin(), t.end());
    if (spec.name.rfind("dense/", 0) == 0)
      std::fill(data.begin(), data.end(), 0.0f);
    out.add_tensor(spec.name, spec.shape, data, spec.learnable);
  }
  return out;
}

}  // namespace

TEST_CASE("reference config parameter counts") {
  const auto cfg = ModelConfig::reference();
  CHECK(cfg.expected_learnable() == 46612);
  CHECK(cfg.expected_non_learnable() == 208);
  CHECK(cfg.node_features() == 480);
  CHECK(cfg.encoder_time() == 24);
}

TEST_CASE("manifest counting agrees with the closed-form audit") {
  const auto wc = ref_weights();
  CHECK(wc->learnable_count() == wc->config().expected_learnable());
  CHECK(wc->non_learnable_count() == wc->config().expected_non_learnable());
}

TEST_CASE("weight container file round-trip with checksum") {
  const auto tmp = std::filesystem::temp_directory_path() /
                   "neo_weights_test.neowts";
  const auto wc = ref_weights(42);
  wc->save(tmp.string());
  const auto back = WeightContainer::load(tmp.string());
  CHECK(back.adjacency_hash() == wc->adjacency_hash());
  CHECK(back.learnable_count() == wc->learnable_count());
  CHECK(back.config().to_json() == wc->config().to_json());
  const auto a = wc->tensor("gat/1/w");
  const auto b = back.tensor("gat/1/w");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); i += 977) CHECK(a[i] == b[i]);

  // corrupt one blob byte: checksum must reject
  {
    std::FILE* f = std::fopen(tmp.string().c_str(), "rb+");
    std::fseek(f, -4, SEEK_END);
    int c = std::fgetc(f);
    std::fseek(f, -1, SEEK_CUR);
    std::fputc(c ^ 0x40, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(WeightContainer::load(tmp.string()), IoError);
  std::filesystem::remove(tmp);
}

TEST_CASE("preprocess_for_model: 12x3000 -> 12x384") {
  const auto raw = random_raw(5);
  const auto e = preprocess_for_model(raw, true);
  CHECK(e.data.rows() == 12);
  CHECK(e.data.cols() == 384);
  CHECK_THROWS_AS(preprocess_for_model(MatrixRM::Zero(12, 2999), true),
                  NumericError);
  CHECK_THROWS_AS(preprocess_for_model(MatrixRM::Zero(8, 3000), true),
                  NumericError);
}

TEST_CASE("preprocess_for_model: zero input stays zero") {
  const auto e = preprocess_for_model(MatrixRM::Zero(12, 3000), false);
  CHECK(e.data.cwiseAbs().maxCoeff() == 0.0);
  // with z-score enabled a flat channel is left at zero, not NaN
  const auto ez = preprocess_for_model(MatrixRM::Zero(12, 3000), true);
  CHECK(ez.data.allFinite());
  CHECK(ez.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preprocess_for_model: 30 Hz rejected >= 24 dB vs 5 Hz probe") {
  MatrixRM raw30(12, 3000), raw5(12, 3000);
  for (int c = 0; c < 12; ++c)
    for (int t = 0; t < 3000; ++t) {
      raw30(c, t) = std::sin(2.0 * std::numbers::pi * 30.0 * t / 250.0);
      raw5(c, t) = std::sin(2.0 * std::numbers::pi * 5.0 * t / 250.0);
    }
  const auto e30 = preprocess_for_model(raw30, false);
  const auto e5 = preprocess_for_model(raw5, false);
  std::span<const double> y30(e30.data.row(0).data() + 96, 192);
  std::span<const double> y5(e5.data.row(0).data() + 96, 192);
  CHECK(20.0 * std::log10(oracles::rms(y30) / oracles::rms(y5)) <= -24.0);
}

TEST_CASE("forward: probability in (0,1), deterministic") {
  const auto wc = ref_weights(7);
  CnnGatModel model(wc, MontageGraph::standard_reduced());
  const auto e = random_epoch(3);
  const auto r1 = model.forward(e);
  const auto r2 = model.forward(e);
  CHECK(r1.probability > 0.0);
  CHECK(r1.probability < 1.0);
  CHECK(r1.probability == r2.probability);  // bit-identical
  CHECK(r1.acts.gat_in.rows() == 12);
  CHECK(r1.acts.gat_in.cols() == 480);
  CHECK(r1.acts.gat[2].out.cols() == 24);
}

TEST_CASE("forward rejects a container pinned to another montage") {
  const auto wc = ref_weights(7);
  std::istringstream two("Fp1-T3\nT3-O1\nFp1-C3\nC3-O1\nT3-C3\nC3-Cz\n");
  const auto other = MontageGraph::from_config(two);
  CHECK_THROWS_AS(CnnGatModel(wc, other), NumericError);
}

TEST_CASE("gat_layer: attention rows sum to one over neighborhoods") {
  const auto m = MontageGraph::standard_reduced();
  GatParams p;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const int fin = 16, fout = 8;
  p.w.resize(fout, fin);
  for (int i = 0; i < fout; ++i)
    for (int j = 0; j < fin; ++j) p.w(i, j) = g(rng) * 0.3;
  p.a_src.resize(fout);
  p.a_dst.resize(fout);
  for (int i = 0; i < fout; ++i) {
    p.a_src(i) = g(rng) * 0.3;
    p.a_dst(i) = g(rng) * 0.3;
  }
  p.bias = Eigen::VectorXd::Zero(fout);

  MatrixRM h(12, fin);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < fin; ++j) h(i, j) = g(rng);

  const auto tr = gat_layer(h, m.adjacency(), p, Activation::elu);
  for (int i = 0; i < 12; ++i)
    CHECK(tr.alpha.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gat_layer: equal neighbor features pass through the transform") {
  // every node carries the same feature vector, so attention weighting is
  // immaterial and the pre-activation must equal W h + b at every node
  const auto m = MontageGraph::standard_reduced();
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  const int fin = 6, fout = 4;
  GatParams p;
  p.w.resize(fout, fin);
  for (int i = 0; i < fout; ++i)
    for (int j = 0; j < fin; ++j) p.w(i, j) = g(rng);
  p.a_src.resize(fout);
  p.a_dst.resize(fout);
  for (int i = 0; i < fout; ++i) {
    p.a_src(i) = g(rng);
    p.a_dst(i) = g(rng);
  }
  p.bias.resize(fout);
  for (int i = 0; i < fout; ++i) p.bias(i) = g(rng);

  Eigen::VectorXd shared(fin);
  for (int j = 0; j < fin; ++j) shared(j) = g(rng);
  MatrixRM h(12, fin);
  for (int i = 0; i < 12; ++i) h.row(i) = shared.transpose();

  const auto tr = gat_layer(h, m.adjacency(), p, Activation::elu);
  const Eigen::VectorXd want = p.w * shared + p.bias;
  for (int i = 0; i < 12; ++i)
    for (int f = 0; f < fout; ++f)
      CHECK(tr.pre(i, f) == doctest::Approx(want(f)).epsilon(1e-12));
}

TEST_CASE("gat_layer: zeroing an edge only perturbs its endpoints' rows") {
  const auto m = MontageGraph::standard_reduced();
  auto adj = m.adjacency();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const int fin = 8, fout = 5;
  GatParams p;
  p.w.resize(fout, fin);
  for (int i = 0; i < fout; ++i)
    for (int j = 0; j < fin; ++j) p.w(i, j) = g(rng) * 0.4;
  p.a_src.resize(fout);
  p.a_dst.resize(fout);
  for (int i = 0; i < fout; ++i) {
    p.a_src(i) = g(rng) * 0.4;
    p.a_dst(i) = g(rng) * 0.4;
  }
  p.bias = Eigen::VectorXd::Zero(fout);
  MatrixRM h(12, fin);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < fin; ++j) h(i, j) = g(rng);

  const auto base = gat_layer(h, adj, p, Activation::elu);
  REQUIRE(adj[0][1]);  // Fp1-T3 ~ T3-O1 share T3
  adj[0][1] = adj[1][0] = false;
  const auto cut = gat_layer(h, adj, p, Activation::elu);
  for (int i = 0; i < 12; ++i) {
    const double diff =
        (base.out.row(i) - cut.out.row(i)).cwiseAbs().maxCoeff();
    if (i == 0 || i == 1)
      CHECK(diff > 1e-12);
    else
      CHECK(diff == 0.0);
  }
}

TEST_CASE("head gradient matches central finite differences") {
  const auto montage = MontageGraph::standard_reduced();
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto wc = ref_weights(100 + static_cast<std::uint64_t>(trial));
    CnnGatModel model(wc, montage);
    const auto fwd = model.forward(random_epoch(200 + static_cast<std::uint64_t>(trial)));
    const auto grads = logit_gradients(model, fwd.acts);
    const MatrixRM h3 = fwd.acts.gat[2].out;

    const double step = 1e-3;
    for (int probe = 0; probe < 10; ++probe) {
      const int i = static_cast<int>(rng() % 12);
      const int f =
          static_cast<int>(rng() % static_cast<std::uint64_t>(h3.cols()));
      MatrixRM hp = h3, hm = h3;
      hp(i, f) += step;
      hm(i, f) -= step;
      const double fd =
          (head_logit(model, hp) - head_logit(model, hm)) / (2.0 * step);
      const double an = grads.d_final_gat(i, f);
      const double rel =
          std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("full GAT-stack input gradient matches finite differences") {
  const auto montage = MontageGraph::standard_reduced();
  const auto wc = ref_weights(33);
  CnnGatModel model(wc, montage);
  const auto fwd = model.forward(random_epoch(44));
  const auto grads = logit_gradients(model, fwd.acts);

  std::mt19937_64 rng(55);
  const double step = 1e-4;
  for (int probe = 0; probe < 24; ++probe) {
    const int i = static_cast<int>(rng() % 12);
    const int f = static_cast<int>(rng() % 480);
    MatrixRM hp = fwd.acts.gat_in, hm = fwd.acts.gat_in;
    hp(i, f) += step;
    hm(i, f) -= step;
    const double fd =
        (logit_from_gat_in(model, hp) - logit_from_gat_in(model, hm)) /
        (2.0 * step);
    const double an = grads.d_gat_in(i, f);
    CHECK(std::abs(fd - an) <=
          1e-5 * std::max({std::abs(fd), std::abs(an), 1e-6}) + 1e-9);
  }
}

TEST_CASE("grad_cam: zero dense head gives all-zero relevance") {
  const auto montage = MontageGraph::standard_reduced();
  const auto zero_head = std::make_shared<WeightContainer>(
      with_zero_head(*ref_weights(5), montage));
  CnnGatModel model(zero_head, montage);
  const auto rel = grad_cam(model, random_epoch(6));
  for (double v : rel.channel_scores) CHECK(v == 0.0);
  for (double v : rel.temporal_scores) CHECK(v == 0.0);
}

TEST_CASE("grad_cam: scores rectified and max-normalized") {
  const auto montage = MontageGraph::standard_reduced();
  CnnGatModel model(ref_weights(8), montage);
  const auto rel = grad_cam(model, random_epoch(9));
  REQUIRE(rel.temporal_scores.size() == 384);
  double cmax = 0.0, tmax = 0.0;
  for (double v : rel.channel_scores) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    cmax = std::max(cmax, v);
  }
  for (double v : rel.temporal_scores) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    tmax = std::max(tmax, v);
  }
  if (cmax > 0.0) CHECK(cmax == doctest::Approx(1.0).epsilon(1e-12));
  if (tmax > 0.0) CHECK(tmax == doctest::Approx(1.0).epsilon(1e-12));
  const auto top = rel.top_channels(3);
  REQUIRE(top.size() == 3);
  CHECK(rel.channel_scores[static_cast<std::size_t>(top[0])] >=
        rel.channel_scores[static_cast<std::size_t>(top[1])]);
}

TEST_CASE("permutation invariance of probability under graph relabeling") {
  // permuting epoch rows together with the adjacency (and re-pinning the
  // container) must not move the probability: the GAT + GAP head is
  // order-free
  const auto montage = MontageGraph::standard_reduced();
  const auto wc = ref_weights(64);
  CnnGatModel model(wc, montage);
  const auto epoch = random_epoch(77);
  const double p_base = model.forward(epoch).probability;

  const std::vector<int> perm{4, 9, 1, 3, 0, 7, 6, 2, 11, 5, 10, 8};
  std::string cfg_text = "ref Cz\n";
  const auto names = montage.channel_names();
  for (int idx : perm) cfg_text += names[static_cast<std::size_t>(idx)] + "\n";
  std::istringstream is(cfg_text);
  const auto permuted = MontageGraph::from_config(is);

  auto wc2 = *wc;  // same tensors, re-pinned adjacency
  wc2.rebind_adjacency(permuted);
  CnnGatModel model2(std::make_shared<WeightContainer>(wc2), permuted);

  Epoch pe;
  pe.data.resize(12, 384);
  for (int i = 0; i < 12; ++i)
    pe.data.row(i) = epoch.data.row(perm[static_cast<std::size_t>(i)]);
  const double p_perm = model2.forward(pe).probability;
  CHECK(p_perm == doctest::Approx(p_base).epsilon(1e-9));
}

TEST_CASE("forward + grad_cam latency well under the 1 s hop budget") {
  const auto wc = ref_weights(1);
  CnnGatModel model(wc, MontageGraph::standard_reduced());
  const auto e = random_epoch(8);
  grad_cam(model, model.forward(e));  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = 20;
  for (int i = 0; i < reps; ++i) grad_cam(model, model.forward(e));
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count() /
                    reps;
  CHECK(ms < 50.0);
}
