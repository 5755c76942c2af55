#pragma once

#include <cstdint>
#include <string>

#include "app_config.hpp"

namespace neomon {

struct SimulateOpts {
  std::string scenario;
  int port = -1;  // -1: app config; 0: ephemeral
  bool turbo = false;
  double duration_s = 0.0;  // 0 = scenario value
  std::uint64_t seed = 0;   // 0 = scenario value
  std::string annotations_out;
  int frames_per_packet = 10;
};
int cmd_simulate(const AppConfig& app, const SimulateOpts& opts);

struct RecordOpts {
  std::string host;
  std::uint16_t port = 0;
  std::string out;
  double max_seconds = 0.0;  // 0 = until EOF
};
int cmd_record(const AppConfig& app, const RecordOpts& opts);

struct MonitorOpts {
  std::string host;
  std::uint16_t port = 0;
  std::string weights;
  std::string montage_file;
  std::string detector = "model";  // model | bandpower-fixture
  double threshold = -1.0;  // < 0: fall back to the app config
  std::string record_out;
  double max_seconds = 0.0;
};
int cmd_monitor(const AppConfig& app, const MonitorOpts& opts);

struct DetectOpts {
  std::string input;
  std::string weights;
  std::string montage_file;
  double threshold = -1.0;
  std::string relevance_out;
  double hop_s = 1.0;
};
int cmd_detect(const AppConfig& app, const DetectOpts& opts);

struct CleanOpts {
  std::string input;
  std::string out;
  std::string report_out;
  double window_s = 120.0;
  std::uint64_t seed = 1;
};
int cmd_clean(const AppConfig& app, const CleanOpts& opts);

struct AnalyzeOpts {
  std::string file_a;
  std::string file_b;
  std::string states;
  std::string report_out;
  std::string spectra_prefix;
};
int cmd_analyze(const AppConfig& app, const AnalyzeOpts& opts);

struct PrepareOpts {
  std::string edf_dir;
  std::string annotations_dir;  // empty = alongside the EDFs
  std::string out;
  bool stream_mode = false;
  double hop_s = 1.0;
};
int cmd_prepare(const AppConfig& app, const PrepareOpts& opts);

struct FilterDesignOpts {
  std::string type;  // butterworth-bandpass | notch | cheby2-bandpass
  int order = 4;
  double lo = 0.0, hi = 0.0;  // Hz when fs > 0, else cycles/sample
  double fs = 0.0;
  double center = 50.0, bw = 4.0;
  double atten_db = 40.0;
  bool nyquist_edges = false;
};
int cmd_filter_design(const FilterDesignOpts& opts);

}  // namespace neomon
