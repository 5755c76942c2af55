#include <benchmark/benchmark.h>

#include <random>

#include "neo/dsp/biquad.hpp"
#include "neo/dsp/design.hpp"
#include "neo/dsp/resample.hpp"
#include "neo/dsp/welch.hpp"

using namespace neo;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

}  // namespace

static void BM_PreprocessingChain8ch(benchmark::State& state) {
  const auto chain = dsp::design_preprocessing_chain(250.0);
  dsp::BiquadFilter filter(chain, 8);
  MatrixRM x(8, 250);  // one second
  x.setRandom();
  for (auto _ : state) {
    filter.process_inplace(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * 250 * 8);
}
BENCHMARK(BM_PreprocessingChain8ch);

static void BM_Resample12s(benchmark::State& state) {
  const auto x = noise(3000);
  for (auto _ : state) {
    auto y = dsp::resample_to_32hz(x);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Resample12s);

static void BM_WelchPsd12s(benchmark::State& state) {
  const auto x = noise(3000);
  for (auto _ : state) {
    auto s = dsp::welch_psd(x, 250.0);
    benchmark::DoNotOptimize(s.power.data());
  }
}
BENCHMARK(BM_WelchPsd12s);

static void BM_ButterworthDesign(benchmark::State& state) {
  for (auto _ : state) {
    auto c = dsp::design_butterworth_bandpass(4, 0.004, 0.4);
    benchmark::DoNotOptimize(c.sections().data());
  }
}
BENCHMARK(BM_ButterworthDesign);

static void BM_NotchDesign(benchmark::State& state) {
  for (auto _ : state) {
    auto c = dsp::design_notch(50.0, 4.0, 250.0);
    benchmark::DoNotOptimize(c.sections().data());
  }
}
BENCHMARK(BM_NotchDesign);
