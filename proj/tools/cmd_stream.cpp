#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "commands.hpp"
#include "neo/adc.hpp"
#include "neo/pipeline.hpp"
#include "neo/stream/decoder.hpp"
#include "neo/stream/edf.hpp"
#include "neo/stream/packet.hpp"
#include "neo/stream/session.hpp"
#include "neo/stream/synth.hpp"
#include "neo/stream/tcp.hpp"

namespace neomon {

using namespace neo;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
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

void write_annotations(const std::string& path,
                       const std::vector<AnnotationSpan>& spans) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write annotations: " + path);
  for (const auto& s : spans)
    out << s.t0_s << ' ' << s.t1_s << ' ' << s.label << '\n';
}

// fixed-capacity handoff queue between the decode and processing stages;
// blocks the producer when the consumer lags (backpressure, not drop)
class FrameQueue {
 public:
  explicit FrameQueue(std::size_t cap) : cap_(cap) {}

  void push(std::vector<SampleFrame> frames) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return q_.size() < cap_ || closed_; });
    if (closed_) return;
    q_.push_back(std::move(frames));
    not_empty_.notify_one();
  }

  bool pop(std::vector<SampleFrame>& out) {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return false;
    out = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return true;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<std::vector<SampleFrame>> q_;
  std::size_t cap_;
  bool closed_ = false;
};

}  // namespace

int cmd_simulate(const AppConfig& app, const SimulateOpts& opts) {
  install_signal_handlers();
  auto synth_cfg = load_scenario(!opts.scenario.empty() ? opts.scenario
                                                        : app.scenario);
  if (opts.duration_s > 0) synth_cfg.duration_s = opts.duration_s;
  if (opts.seed != 0) synth_cfg.seed = opts.seed;

  stream::SyntheticDevice dev(synth_cfg);
  if (!opts.annotations_out.empty())
    write_annotations(opts.annotations_out, dev.annotations());

  const std::uint16_t port =
      opts.port >= 0 ? static_cast<std::uint16_t>(opts.port) : app.port;
  auto listener = stream::TcpListener::bind(port);
  std::printf("listening port=%u\n", listener.port());
  std::fflush(stdout);

  auto conn = listener.accept();
  const auto n_frames = static_cast<std::uint64_t>(
      synth_cfg.duration_s * kDeviceRateHz);
  const int per_packet = opts.frames_per_packet;

  std::uint64_t sent = 0;
  const auto start = std::chrono::steady_clock::now();
  while (sent < n_frames && !g_stop) {
    const auto n = static_cast<std::size_t>(
        std::min<std::uint64_t>(per_packet, n_frames - sent));
    const auto frames = dev.frames(n);
    conn.send_all(stream::encode_packet(frames));
    sent += n;
    if (!opts.turbo) {
      const auto due = start + std::chrono::microseconds(
                                   sent * kFrameIntervalUs);
      std::this_thread::sleep_until(due);
    }
  }
  conn.close();
  std::printf("sent frames=%llu\n", static_cast<unsigned long long>(sent));
  return 0;
}

namespace {

// shared receive loop: connect, decode, hand frame batches to a sink
template <typename Sink>
void receive_stream(const std::string& host, std::uint16_t port,
                    double max_seconds, stream::StreamDecoder& dec,
                    Sink&& sink) {
  auto conn = stream::TcpConn::connect(host, port);
  std::vector<std::uint8_t> buf(16384);
  std::uint64_t frames_seen = 0;
  const double max_frames = max_seconds > 0 ? max_seconds * kDeviceRateHz : 0;
  while (!g_stop) {
    const auto n = conn.recv_some(buf);
    if (n == 0) break;  // orderly close
    dec.feed(std::span<const std::uint8_t>(buf.data(), n));
    auto frames = dec.take_frames();
    if (!frames.empty()) {
      frames_seen += frames.size();
      sink(std::move(frames));
    }
    if (max_frames > 0 && static_cast<double>(frames_seen) >= max_frames)
      break;
  }
}

void print_decode_summary(const stream::StreamDecoder& dec) {
  const auto& st = dec.stats();
  std::printf("summary packets=%llu crc_failures=%llu framing_errors=%llu "
              "gaps=%zu\n",
              static_cast<unsigned long long>(st.packets_ok),
              static_cast<unsigned long long>(st.crc_failures),
              static_cast<unsigned long long>(st.framing_errors),
              dec.gaps().size());
  for (const auto& g : dec.gaps())
    std::printf("gap seq=%u..%u\n", g.from_seq, g.to_seq);
}

}  // namespace

int cmd_record(const AppConfig& app, const RecordOpts& opts) {
  install_signal_handlers();
  const std::string host = !opts.host.empty() ? opts.host : app.host;
  const std::uint16_t port = opts.port != 0 ? opts.port : app.port;

  const bool to_edf = opts.out.size() > 4 &&
                      opts.out.substr(opts.out.size() - 4) == ".edf";
  const std::vector<std::string> channels = {"Fp1", "Fp2", "C3", "C4",
                                             "T3",  "T4",  "O1", "O2"};

  stream::SessionHeader hdr;
  hdr.fs_hz = kDeviceRateHz;
  hdr.channels = channels;

  std::unique_ptr<stream::SessionWriter> writer;
  Recording edf_rec;  // accumulated only for EDF export
  if (to_edf) {
    edf_rec.fs_hz = kDeviceRateHz;
    edf_rec.channels = channels;
    edf_rec.data.resize(8, 0);
  } else {
    writer = std::make_unique<stream::SessionWriter>(opts.out, hdr);
  }

  std::vector<double> edf_samples;  // sample-major staging for EDF
  stream::StreamDecoder dec;
  receive_stream(host, port, opts.max_seconds, dec,
                 [&](std::vector<SampleFrame> frames) {
                   for (const auto& f : frames) {
                     std::vector<double> uv(8);
                     for (int c = 0; c < 8; ++c)
                       uv[static_cast<std::size_t>(c)] = adc_to_microvolts(
                           f.adc[static_cast<std::size_t>(c)]);
                     if (writer) {
                       std::int16_t imu[6] = {f.accel[0], f.accel[1],
                                              f.accel[2], f.gyro[0],
                                              f.gyro[1],  f.gyro[2]};
                       writer->push(uv, imu);
                     } else {
                       edf_samples.insert(edf_samples.end(), uv.begin(),
                                          uv.end());
                     }
                   }
                 });

  if (writer) {
    writer->close();
  } else {
    const auto n = static_cast<Eigen::Index>(edf_samples.size() / 8);
    edf_rec.data.resize(8, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 8; ++c)
        edf_rec.data(c, i) = edf_samples[static_cast<std::size_t>(i) * 8 +
                                         static_cast<std::size_t>(c)];
    stream::write_edf(opts.out, edf_rec);
  }
  print_decode_summary(dec);
  return 0;
}

int cmd_monitor(const AppConfig& app, const MonitorOpts& opts) {
  install_signal_handlers();
  const std::string host = !opts.host.empty() ? opts.host : app.host;
  const std::uint16_t port = opts.port != 0 ? opts.port : app.port;

  const auto montage = montage_from(app, opts.montage_file);

  PipelineConfig pcfg;
  pcfg.threshold = opts.threshold >= 0 ? opts.threshold : app.threshold;
  pcfg.edges = app.edges;
  pcfg.motion = app.imu;
  pcfg.zscore = app.zscore;
  std::shared_ptr<const detect::WeightContainer> weights;
  if (opts.detector == "bandpower-fixture") {
    pcfg.detector = DetectorKind::bandpower_fixture;
  } else if (opts.detector == "model") {
    pcfg.detector = DetectorKind::model;
    weights = weights_from(app, opts.weights, montage);
  } else {
    throw UsageError("monitor: unknown detector '" + opts.detector + "'");
  }

  StreamPipeline pipeline(montage, weights, pcfg);
  const auto names = montage.channel_names();

  pipeline.on_epoch = [&](const EpochReport& r) {
    std::string top;
    for (std::size_t i = 0; i < r.top_channels.size(); ++i) {
      if (i) top += ',';
      top += names[static_cast<std::size_t>(r.top_channels[i])];
    }
    std::printf("epoch t=%.1f p=%.4f top=%s dt=%.1fms\n", r.t_start_s,
                r.probability, top.empty() ? "-" : top.c_str(), r.process_ms);
  };
  pipeline.on_seizure = [&](const SeizureEvent& ev) {
    std::printf("EVENT seizure t=%.1f mean_p=%.3f epochs=%d\n", ev.t_start_s,
                ev.mean_prob, ev.n_epochs);
    std::fflush(stdout);
  };
  pipeline.on_motion = [&](const stream::MotionEvent& ev) {
    std::printf("ALERT motion t=%.2f..%.2f peak=%.2fg %.0fdps severity=%s\n",
                static_cast<double>(ev.t_start_us) / 1e6,
                static_cast<double>(ev.t_end_us) / 1e6, ev.peak_accel_g,
                ev.peak_gyro_dps,
                ev.severity == stream::MotionSeverity::major ? "major"
                                                             : "minor");
    std::fflush(stdout);
  };

  std::unique_ptr<stream::SessionWriter> writer;
  if (!opts.record_out.empty()) {
    stream::SessionHeader hdr;
    hdr.fs_hz = kDeviceRateHz;
    hdr.channels = montage.raw_channels();
    writer = std::make_unique<stream::SessionWriter>(opts.record_out, hdr);
  }

  // decode thread feeds a bounded queue; this thread runs DSP + detection
  FrameQueue queue(64);
  stream::StreamDecoder dec;
  std::exception_ptr rx_error;
  std::thread rx([&] {
    try {
      receive_stream(host, port, opts.max_seconds, dec,
                     [&](std::vector<SampleFrame> frames) {
                       if (writer) {
                         for (const auto& f : frames) {
                           std::vector<double> uv(8);
                           for (int c = 0; c < 8; ++c)
                             uv[static_cast<std::size_t>(c)] =
                                 adc_to_microvolts(
                                     f.adc[static_cast<std::size_t>(c)]);
                           std::int16_t imu[6] = {f.accel[0], f.accel[1],
                                                  f.accel[2], f.gyro[0],
                                                  f.gyro[1],  f.gyro[2]};
                           writer->push(uv, imu);
                         }
                       }
                       queue.push(std::move(frames));
                     });
    } catch (...) {
      rx_error = std::current_exception();
    }
    queue.close();
  });

  std::vector<SampleFrame> batch;
  while (queue.pop(batch)) {
    for (const auto& f : batch) pipeline.push(f);
  }
  rx.join();
  if (writer) writer->close();
  if (rx_error) std::rethrow_exception(rx_error);

  print_decode_summary(dec);
  std::printf("frames=%llu\n",
              static_cast<unsigned long long>(pipeline.frames_seen()));
  return 0;
}

}  // namespace neomon
