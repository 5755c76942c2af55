#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "neo/detector/gradcam.hpp"
#include "neo/detector/model.hpp"

using namespace neo;

namespace {

detect::CnnGatModel& model() {
  static const auto montage = MontageGraph::standard_reduced();
  static detect::CnnGatModel m(
      std::make_shared<detect::WeightContainer>(
          detect::WeightContainer::random(detect::ModelConfig::reference(),
                                          montage, 1)),
      montage);
  return m;
}

Epoch random_epoch() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Epoch e;
  e.data.resize(12, 384);
  for (int c = 0; c < 12; ++c)
    for (int t = 0; t < 384; ++t) e.data(c, t) = g(rng);
  return e;
}

MatrixRM random_raw() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 20.0);
  MatrixRM raw(12, 3000);
  for (int c = 0; c < 12; ++c)
    for (int t = 0; t < 3000; ++t) raw(c, t) = g(rng);
  return raw;
}

}  // namespace

static void BM_PreprocessForModel(benchmark::State& state) {
  const auto raw = random_raw();
  for (auto _ : state) {
    auto e = detect::preprocess_for_model(raw, true);
    benchmark::DoNotOptimize(e.data.data());
  }
}
BENCHMARK(BM_PreprocessForModel);

static void BM_Forward(benchmark::State& state) {
  auto& m = model();
  const auto e = random_epoch();
  for (auto _ : state) {
    auto r = m.forward(e);
    benchmark::DoNotOptimize(r.probability);
  }
}
BENCHMARK(BM_Forward);

static void BM_ForwardPlusGradCam(benchmark::State& state) {
  auto& m = model();
  const auto e = random_epoch();
  for (auto _ : state) {
    auto rel = detect::grad_cam(m, m.forward(e));
    benchmark::DoNotOptimize(rel.temporal_scores.data());
  }
}
BENCHMARK(BM_ForwardPlusGradCam);
