#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <thread>

#include "neo/stream/edf.hpp"
#include "neo/stream/session.hpp"
#include "neo/stream/synth.hpp"
#include "neo/detector/weights.hpp"
#include "neo/montage.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* p = std::getenv("NEOMON_BIN");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout + stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " 2>&1";
  std::FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("neomon_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// launch `simulate`, parse the ephemeral port line, return a process handle
struct Simulator {
  std::FILE* proc = nullptr;
  int port = 0;
  std::string tail;

  explicit Simulator(const std::string& extra_args) {
    const std::string cmd =
        bin() + " simulate --port 0 --turbo " + extra_args + " 2>&1";
    proc = popen(cmd.c_str(), "r");
    REQUIRE(proc != nullptr);
    char line[512];
    REQUIRE(std::fgets(line, sizeof line, proc) != nullptr);
    const std::string first = line;
    const auto pos = first.find("port=");
    REQUIRE(pos != std::string::npos);
    port = std::atoi(first.c_str() + pos + 5);
    REQUIRE(port > 0);
  }
  ~Simulator() {
    if (proc) finish();
  }
  int finish() {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, proc)) > 0) tail.append(buf, n);
    const int status = pclose(proc);
    proc = nullptr;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

std::string make_scenario(const TempDir& tmp, const std::string& name,
                          const std::string& json) {
  const auto path = tmp.file(name);
  std::ofstream out(path);
  out << json;
  return path;
}

int count_lines(const std::string& text, const std::string& needle) {
  int n = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.find(needle) != std::string::npos) ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("detect").exit_code == 1);  // missing required --input
  CHECK(run("--help").exit_code == 0);
}

TEST_CASE("filter-design dumps one section per line") {
  const auto r = run("filter-design --type butterworth-bandpass --order 4 "
                     "--lo 1 --hi 100 --fs 250");
  CHECK(r.exit_code == 0);
  std::istringstream is(r.out);
  std::string line;
  int sections = 0;
  while (std::getline(is, line)) {
    double b0, b1, b2, a1, a2;
    REQUIRE(std::sscanf(line.c_str(), "%lf %lf %lf %lf %lf", &b0, &b1, &b2,
                        &a1, &a2) == 5);
    ++sections;
  }
  CHECK(sections == 4);

  const auto n = run("filter-design --type notch --center 50 --bw 4 --fs 250");
  CHECK(n.exit_code == 0);
  CHECK(count_lines(n.out, " ") == 1);

  // numeric design failure maps to exit 4
  CHECK(run("filter-design --type notch --center 200 --bw 4 --fs 250")
            .exit_code == 4);
}

TEST_CASE("simulate: deterministic annotations, frame count, bad port") {
  TempDir tmp;
  const auto ann1 = tmp.file("a1.ann");
  const auto ann2 = tmp.file("a2.ann");

  {
    Simulator sim("--scenario clean --duration 4 --seed 9 --annotations " +
                  ann1);
    const auto r = run("record --host 127.0.0.1 --port " +
                       std::to_string(sim.port) + " --out " +
                       tmp.file("s1.neoses"));
    CHECK(r.exit_code == 0);
    CHECK(sim.finish() == 0);
    CHECK(sim.tail.find("sent frames=1000") != std::string::npos);
  }
  {
    Simulator sim("--scenario clean --duration 4 --seed 9 --annotations " +
                  ann2);
    run("record --host 127.0.0.1 --port " + std::to_string(sim.port) +
        " --out " + tmp.file("s2.neoses"));
    sim.finish();
  }
  std::ifstream f1(ann1), f2(ann2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK_FALSE(s1.str().empty());

  // occupied port -> I/O failure, diagnostic on stderr
  Simulator holder("--scenario clean --duration 1");
  const auto bad =
      run("simulate --scenario clean --duration 1 --port " +
          std::to_string(holder.port));
  CHECK(bad.exit_code == 2);
  CHECK(bad.out.find("error") != std::string::npos);
  // release the holder by connecting and draining
  run("record --host 127.0.0.1 --port " + std::to_string(holder.port) +
      " --out /tmp/neomon_drain.neoses");
  holder.finish();
  fs::remove("/tmp/neomon_drain.neoses");
}

TEST_CASE("record: session file round-trips the stream") {
  TempDir tmp;
  const auto out = tmp.file("rec.neoses");
  Simulator sim("--scenario default --duration 6 --seed 4");
  const auto r = run("record --host 127.0.0.1 --port " +
                     std::to_string(sim.port) + " --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(sim.finish() == 0);
  CHECK(r.out.find("crc_failures=0") != std::string::npos);
  CHECK(r.out.find("gaps=0") != std::string::npos);

  const auto data = neo::stream::read_session(out);
  CHECK(data.recording.n_channels() == 8);
  CHECK(data.recording.n_samples() == 1500);  // 6 s at 250 Hz
}

TEST_CASE("monitor with the band-power fixture finds the seizure window") {
  TempDir tmp;
  const auto scenario = make_scenario(tmp, "sz.json", R"({
    "duration_s": 120, "seed": 5, "line_uv": 2.0,
    "segments": [[0,60,"eyes_open"],[60,90,"seizure"],[90,120,"eyes_open"]],
    "motion": [[20.0, 0.3, 0.6, 0.0]]
  })");
  Simulator sim("--scenario " + scenario);
  const auto r = run("monitor --host 127.0.0.1 --port " +
                     std::to_string(sim.port) +
                     " --detector bandpower-fixture --record " +
                     tmp.file("mon.neoses"));
  CHECK(r.exit_code == 0);
  CHECK(sim.finish() == 0);

  // exactly one seizure event, onset within +-6 s of 60 s
  std::smatch m;
  std::regex ev_re("EVENT seizure t=([0-9.]+)");
  REQUIRE(std::regex_search(r.out, m, ev_re));
  const double t_event = std::stod(m[1]);
  CHECK(t_event >= 54.0);
  CHECK(t_event <= 66.0);
  CHECK(count_lines(r.out, "EVENT seizure") == 1);

  // motion alert near 20 s
  std::regex mo_re("ALERT motion t=([0-9.]+)");
  REQUIRE(std::regex_search(r.out, m, mo_re));
  const double t_motion = std::stod(m[1]);
  CHECK(t_motion >= 19.5);
  CHECK(t_motion <= 21.5);

  // per-epoch lines flow and the recording is intact
  CHECK(count_lines(r.out, "epoch t=") > 100);
  const auto data = neo::stream::read_session(tmp.file("mon.neoses"));
  CHECK(data.recording.n_samples() == 30000);
}

TEST_CASE("monitor: clean run emits zero events with the fixture") {
  Simulator sim("--scenario clean --duration 45 --seed 6");
  const auto r = run("monitor --host 127.0.0.1 --port " +
                     std::to_string(sim.port) + " --detector bandpower-fixture");
  CHECK(r.exit_code == 0);
  sim.finish();
  CHECK(count_lines(r.out, "EVENT") == 0);
  CHECK(count_lines(r.out, "epoch t=") > 20);
}

TEST_CASE("monitor with model weights emits probabilities and top channels") {
  TempDir tmp;
  // persist a weight container and use it
  const auto wpath = tmp.file("w.neowts");
  {
    const auto montage = neo::MontageGraph::standard_reduced();
    const auto wc = neo::detect::WeightContainer::random(
        neo::detect::ModelConfig::reference(), montage, 11);
    wc.save(wpath);
  }
  Simulator sim("--scenario clean --duration 20 --seed 12");
  const auto r = run("monitor --host 127.0.0.1 --port " +
                     std::to_string(sim.port) + " --weights " + wpath);
  CHECK(r.exit_code == 0);
  sim.finish();
  CHECK(count_lines(r.out, "epoch t=") >= 8);
  CHECK(r.out.find("top=") != std::string::npos);
}

TEST_CASE("detect: offline scoring of a session file") {
  TempDir tmp;
  // build a session offline via the simulator library (no network)
  neo::stream::SynthConfig cfg;
  cfg.duration_s = 30.0;
  cfg.seed = 3;
  neo::stream::SyntheticDevice dev(cfg);
  const auto rec = dev.render_recording();
  {
    neo::stream::SessionHeader hdr;
    hdr.fs_hz = 250.0;
    hdr.channels = rec.channels;
    neo::stream::SessionWriter w(tmp.file("in.neoses"), hdr);
    for (Eigen::Index i = 0; i < rec.n_samples(); ++i) {
      std::vector<double> uv(8);
      for (int c = 0; c < 8; ++c) uv[static_cast<std::size_t>(c)] = rec.data(c, i);
      w.push_frame_uv(uv);
    }
    w.close();
  }
  const auto rel = tmp.file("rel.tsv");
  const auto r = run("detect --input " + tmp.file("in.neoses") +
                     " --relevance " + rel);
  CHECK(r.exit_code == 0);
  // 30 s -> epochs at 0..18 s
  CHECK(count_lines(r.out, " ") >= 19);
  CHECK(fs::exists(rel));

  // missing input maps to exit 2
  CHECK(run("detect --input /nonexistent.neoses").exit_code == 2);
}

TEST_CASE("clean: session in, cleaned session + report out") {
  TempDir tmp;
  neo::stream::SynthConfig cfg;
  cfg.duration_s = 30.0;
  cfg.seed = 8;
  cfg.blink_uv = 120.0;
  cfg.blink_rate_hz = 0.4;
  neo::stream::SyntheticDevice dev(cfg);
  const auto rec = dev.render_recording();
  {
    neo::stream::SessionHeader hdr;
    hdr.fs_hz = 250.0;
    hdr.channels = rec.channels;
    neo::stream::SessionWriter w(tmp.file("dirty.neoses"), hdr);
    for (Eigen::Index i = 0; i < rec.n_samples(); ++i) {
      std::vector<double> uv(8);
      for (int c = 0; c < 8; ++c) uv[static_cast<std::size_t>(c)] = rec.data(c, i);
      w.push_frame_uv(uv);
    }
    w.close();
  }
  const auto r = run("clean --input " + tmp.file("dirty.neoses") + " --out " +
                     tmp.file("clean.neoses") + " --report " +
                     tmp.file("report.tsv") + " --window 30");
  CHECK(r.exit_code == 0);
  const auto cleaned = neo::stream::read_session(tmp.file("clean.neoses"));
  CHECK(cleaned.recording.n_samples() == rec.n_samples());

  std::ifstream rep(tmp.file("report.tsv"));
  std::string header;
  std::getline(rep, header);
  CHECK(header.find("component") != std::string::npos);
  int rows = 0;
  std::string line;
  while (std::getline(rep, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);  // one 30 s window, 8 components
}

TEST_CASE("analyze: two sessions and a state file produce a report") {
  TempDir tmp;
  neo::stream::SynthConfig cfg;
  cfg.duration_s = 24.0;
  cfg.seed = 2;
  const auto rec = neo::stream::SyntheticDevice(cfg).render_recording();
  for (const char* name : {"a.neoses", "b.neoses"}) {
    neo::stream::SessionHeader hdr;
    hdr.fs_hz = 250.0;
    hdr.channels = rec.channels;
    neo::stream::SessionWriter w(tmp.file(name), hdr);
    for (Eigen::Index i = 0; i < rec.n_samples(); ++i) {
      std::vector<double> uv(8);
      for (int c = 0; c < 8; ++c) uv[static_cast<std::size_t>(c)] = rec.data(c, i);
      w.push_frame_uv(uv);
    }
    w.close();
  }
  {
    std::ofstream st(tmp.file("states.ann"));
    st << "0 12 eyes_open\n12 24 eyes_closed\n";
  }
  const auto r = run("analyze --a " + tmp.file("a.neoses") + " --b " +
                     tmp.file("b.neoses") + " --states " +
                     tmp.file("states.ann") + " --report " +
                     tmp.file("q.tsv") + " --spectra " + tmp.file("spec"));
  CHECK(r.exit_code == 0);
  std::ifstream rep(tmp.file("q.tsv"));
  std::stringstream ss;
  ss << rep.rdbuf();
  CHECK(ss.str().find("eyes_open") != std::string::npos);
  CHECK(fs::exists(tmp.file("spec_eyes_open.tsv")));
  CHECK(fs::exists(tmp.file("spec_eyes_closed.tsv")));
}

TEST_CASE("prepare: EDF directory to epoch tensors") {
  TempDir tmp;
  const auto dir = tmp.path / "edfs";
  fs::create_directories(dir);

  // 30 s, all non-seizure -> train mode, 2 s hop -> 10 epochs
  neo::stream::SynthConfig cfg;
  cfg.duration_s = 30.0;
  cfg.seed = 14;
  const auto rec = neo::stream::SyntheticDevice(cfg).render_recording();
  neo::stream::write_edf((dir / "quiet.edf").string(), rec);

  auto r = run("prepare --edf-dir " + dir.string() + " --out " +
               tmp.file("e1.neowts"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("epochs=10") != std::string::npos);
  CHECK(r.out.find("positive=0") != std::string::npos);

  // fully seizure-annotated -> 1 s hop -> 19 epochs
  {
    std::ofstream ann(dir / "quiet.ann");
    ann << "0 30 seizure\n";
  }
  r = run("prepare --edf-dir " + dir.string() + " --out " +
          tmp.file("e2.neowts"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("epochs=19") != std::string::npos);
  CHECK(r.out.find("positive=19") != std::string::npos);

  const auto tens = neo::detect::WeightContainer::load(tmp.file("e2.neowts"));
  const auto ep = tens.tensor("epochs");
  CHECK(ep.size() == 19u * 12u * 384u);

  // empty directory -> zero epochs, clean exit
  const auto empty = tmp.path / "none";
  fs::create_directories(empty);
  r = run("prepare --edf-dir " + empty.string() + " --out " +
          tmp.file("e3.neowts"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("epochs=0") != std::string::npos);

  // idempotent: re-running produces byte-identical output
  run("prepare --edf-dir " + dir.string() + " --out " + tmp.file("e4.neowts"));
  std::ifstream fa(tmp.file("e2.neowts"), std::ios::binary);
  std::ifstream fb(tmp.file("e4.neowts"), std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());
}

TEST_CASE("edf export and import via record, clean, and detect") {
  TempDir tmp;
  const auto edf_out = tmp.file("rec.edf");
  {
    Simulator sim("--scenario clean --duration 6 --seed 21");
    const auto r = run("record --host 127.0.0.1 --port " +
                       std::to_string(sim.port) + " --out " + edf_out);
    CHECK(r.exit_code == 0);
    sim.finish();
  }
  const auto back = neo::stream::read_edf(edf_out);
  CHECK(back.n_channels() == 8);
  CHECK(back.n_samples() == 1500);

  // detect accepts the EDF directly (8 referential channels -> bipolar)
  // 6 s is shorter than one epoch: zero scored lines, clean exit
  const auto d = run("detect --input " + edf_out);
  CHECK(d.exit_code == 0);

  // clean on the EDF, exporting EDF
  const auto cleaned = tmp.file("cleaned.edf");
  const auto c = run("clean --input " + edf_out + " --out " + cleaned +
                     " --window 6");
  CHECK(c.exit_code == 0);
  CHECK(neo::stream::read_edf(cleaned).n_samples() == 1500);
}

TEST_CASE("app config: unknown keys rejected, env var honored") {
  TempDir tmp;
  const auto bad = tmp.file("bad.json");
  {
    std::ofstream out(bad);
    out << R"({"threshold": 0.5, "frobnicate": 1})";
  }
  const auto r = run("--config " + bad +
                     " filter-design --type notch --center 50 --bw 4 --fs 250");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("unknown key") != std::string::npos);

  const auto good = tmp.file("good.json");
  {
    std::ofstream out(good);
    out << R"({"threshold": 0.7})";
  }
  const std::string cmd = "NEOMON_CONFIG=" + good + " " + bin() +
                          " filter-design --type notch --center 50 --bw 4 "
                          "--fs 250 2>&1";
  std::FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::string out;
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  CHECK(WEXITSTATUS(pclose(p)) == 0);

  // missing referenced path fails at load
  const auto missing = tmp.file("missing.json");
  {
    std::ofstream o(missing);
    o << R"({"weights": "/no/such/file.neowts"})";
  }
  CHECK(run("--config " + missing +
            " filter-design --type notch --center 50 --bw 4 --fs 250")
            .exit_code == 2);
}
