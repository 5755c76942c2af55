#include <benchmark/benchmark.h>

#include "neo/artifact/ica.hpp"
#include "neo/stream/decoder.hpp"
#include "neo/stream/packet.hpp"
#include "neo/stream/synth.hpp"

using namespace neo;

static void BM_EncodePacket(benchmark::State& state) {
  stream::SynthConfig cfg;
  stream::SyntheticDevice dev(cfg);
  const auto frames = dev.frames(10);
  for (auto _ : state) {
    auto bytes = stream::encode_packet(frames);
    benchmark::DoNotOptimize(bytes.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<long>(stream::packet_wire_size(10)));
}
BENCHMARK(BM_EncodePacket);

static void BM_DecodeStream(benchmark::State& state) {
  stream::SynthConfig cfg;
  cfg.duration_s = 10.0;
  stream::SyntheticDevice dev(cfg);
  std::vector<std::uint8_t> bytes;
  for (int p = 0; p < 250; ++p) {
    const auto pkt = stream::encode_packet(dev.frames(10));
    bytes.insert(bytes.end(), pkt.begin(), pkt.end());
  }
  for (auto _ : state) {
    stream::StreamDecoder dec;
    dec.feed(bytes);
    auto frames = dec.take_frames();
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<long>(bytes.size()));
}
BENCHMARK(BM_DecodeStream);

static void BM_SynthFrames(benchmark::State& state) {
  stream::SynthConfig cfg;
  cfg.duration_s = 1e9;
  stream::SyntheticDevice dev(cfg);
  for (auto _ : state) {
    auto frames = dev.frames(250);
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetItemsProcessed(state.iterations() * 250);
}
BENCHMARK(BM_SynthFrames);

static void BM_IcaFit30s(benchmark::State& state) {
  stream::SynthConfig cfg;
  cfg.duration_s = 30.0;
  cfg.blink_uv = 120.0;
  stream::SyntheticDevice dev(cfg);
  const auto rec = dev.render_recording();
  const Eigen::MatrixXd x = rec.data;
  for (auto _ : state) {
    auto model = ica::fit_ica(x, {});
    benchmark::DoNotOptimize(model.rotation.data());
  }
}
BENCHMARK(BM_IcaFit30s)->Unit(benchmark::kMillisecond)->Iterations(3);
