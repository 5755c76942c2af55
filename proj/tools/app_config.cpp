#include "app_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "neo/errors.hpp"

namespace neomon {

using json = nlohmann::json;
using neo::IoError;
using neo::UsageError;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config: " + path + ": " + e.what());
  }
}

void require_exists(const std::string& path, const std::string& what) {
  if (!path.empty() && !std::filesystem::exists(path))
    throw IoError("config: " + what + " does not exist: " + path);
}

}  // namespace

AppConfig AppConfig::load(const std::string& path) {
  const json j = parse_file(path);
  static const std::set<std::string> known = {
      "endpoint",  "montage_file", "weights", "edge_interpretation",
      "threshold", "imu",          "scenario", "zscore"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw UsageError("config: unknown key '" + key + "' in " + path);
  }

  AppConfig c;
  if (j.contains("endpoint")) {
    const auto& e = j.at("endpoint");
    if (e.contains("host")) e.at("host").get_to(c.host);
    if (e.contains("port")) c.port = e.at("port").get<std::uint16_t>();
  }
  if (j.contains("montage_file")) j.at("montage_file").get_to(c.montage_file);
  if (j.contains("weights")) j.at("weights").get_to(c.weights);
  if (j.contains("edge_interpretation")) {
    const auto s = j.at("edge_interpretation").get<std::string>();
    if (s == "fs")
      c.edges = neo::dsp::EdgeInterpretation::fs_relative;
    else if (s == "nyquist")
      c.edges = neo::dsp::EdgeInterpretation::nyquist_relative;
    else
      throw UsageError("config: edge_interpretation must be 'fs' or "
                       "'nyquist', got '" + s + "'");
  }
  if (j.contains("threshold")) j.at("threshold").get_to(c.threshold);
  if (j.contains("imu")) {
    const auto& m = j.at("imu");
    if (m.contains("accel_g")) m.at("accel_g").get_to(c.imu.accel_g);
    if (m.contains("gyro_dps")) m.at("gyro_dps").get_to(c.imu.gyro_dps);
    if (m.contains("min_duration_s"))
      m.at("min_duration_s").get_to(c.imu.min_duration_s);
    if (m.contains("quiet_s")) m.at("quiet_s").get_to(c.imu.quiet_s);
  }
  if (j.contains("scenario")) j.at("scenario").get_to(c.scenario);
  if (j.contains("zscore")) j.at("zscore").get_to(c.zscore);

  require_exists(c.montage_file, "montage_file");
  require_exists(c.weights, "weights");
  return c;
}

AppConfig AppConfig::resolve(const std::string& flag_path) {
  AppConfig c;
  if (!flag_path.empty())
    c = load(flag_path);
  else if (const char* env = std::getenv("NEOMON_CONFIG"); env && *env)
    c = load(env);
  // NEOMON_PORT overrides the config default; CLI flags override both
  if (const char* port = std::getenv("NEOMON_PORT"); port && *port) {
    const long v = std::strtol(port, nullptr, 10);
    if (v <= 0 || v > 65535)
      throw UsageError("NEOMON_PORT: invalid port '" + std::string(port) +
                       "'");
    c.port = static_cast<std::uint16_t>(v);
  }
  return c;
}

neo::stream::SynthConfig load_scenario(const std::string& name_or_path) {
  using neo::stream::BrainState;
  neo::stream::SynthConfig cfg;
  if (name_or_path.empty() || name_or_path == "default") {
    cfg.duration_s = 60.0;
    cfg.segments = {{0.0, 20.0, BrainState::eyes_open},
                    {20.0, 40.0, BrainState::eyes_closed},
                    {40.0, 60.0, BrainState::eyes_open}};
    return cfg;
  }
  if (name_or_path == "seizure-demo") {
    cfg.duration_s = 120.0;
    cfg.segments = {{0.0, 60.0, BrainState::eyes_open},
                    {60.0, 90.0, BrainState::seizure},
                    {90.0, 120.0, BrainState::eyes_open}};
    return cfg;
  }
  if (name_or_path == "clean") {
    cfg.duration_s = 60.0;
    cfg.line_uv = 0.0;
    cfg.blink_uv = 0.0;
    cfg.segments = {{0.0, 60.0, BrainState::eyes_open}};
    return cfg;
  }

  const json j = parse_file(name_or_path);
  static const std::set<std::string> known = {
      "duration_s", "seed",      "background_uv", "noise_uv",
      "line_uv",    "alpha_uv",  "seizure_uv",    "blink_uv",
      "blink_rate_hz", "segments", "motion"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw UsageError("scenario: unknown key '" + key + "'");
  }
  if (j.contains("duration_s")) j.at("duration_s").get_to(cfg.duration_s);
  if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
  if (j.contains("background_uv")) j.at("background_uv").get_to(cfg.background_uv);
  if (j.contains("noise_uv")) j.at("noise_uv").get_to(cfg.noise_uv);
  if (j.contains("line_uv")) j.at("line_uv").get_to(cfg.line_uv);
  if (j.contains("alpha_uv")) j.at("alpha_uv").get_to(cfg.alpha_uv);
  if (j.contains("seizure_uv")) j.at("seizure_uv").get_to(cfg.seizure_uv);
  if (j.contains("blink_uv")) j.at("blink_uv").get_to(cfg.blink_uv);
  if (j.contains("blink_rate_hz")) j.at("blink_rate_hz").get_to(cfg.blink_rate_hz);
  if (j.contains("segments")) {
    for (const auto& s : j.at("segments")) {
      const auto t0 = s.at(0).get<double>();
      const auto t1 = s.at(1).get<double>();
      const auto state = s.at(2).get<std::string>();
      BrainState b;
      if (state == "eyes_open") b = BrainState::eyes_open;
      else if (state == "eyes_closed") b = BrainState::eyes_closed;
      else if (state == "seizure") b = BrainState::seizure;
      else throw UsageError("scenario: unknown state '" + state + "'");
      cfg.segments.push_back({t0, t1, b});
    }
  }
  if (j.contains("motion")) {
    for (const auto& m : j.at("motion"))
      cfg.motion.push_back({m.at(0).get<double>(), m.at(1).get<double>(),
                            m.at(2).get<double>(), m.at(3).get<double>()});
  }
  return cfg;
}

}  // namespace neomon
