#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "neo/errors.hpp"

using namespace neomon;

int main(int argc, char** argv) {
  CLI::App app{"neomon - reduced-montage EEG streaming, seizure detection, "
               "and artifact removal"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "AppConfig JSON (or set NEOMON_CONFIG)");

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Run the synthetic device");
  c_sim->add_option("--scenario", sim.scenario,
                    "Built-in name (default, seizure-demo, clean) or JSON");
  c_sim->add_option("--port", sim.port, "Listen port (0 = ephemeral)");
  c_sim->add_flag("--turbo", sim.turbo, "Send faster than real time");
  c_sim->add_option("--duration", sim.duration_s, "Override duration [s]");
  c_sim->add_option("--seed", sim.seed, "Override scenario seed");
  c_sim->add_option("--annotations", sim.annotations_out,
                    "Write ground-truth annotation file");
  c_sim->add_option("--frames-per-packet", sim.frames_per_packet)
      ->check(CLI::Range(1, 25));

  RecordOpts rec;
  auto* c_rec = app.add_subcommand("record", "Record a device stream");
  c_rec->add_option("--host", rec.host);
  c_rec->add_option("--port", rec.port);
  c_rec->add_option("--out", rec.out, "Session file (.edf exports EDF)")
      ->required();
  c_rec->add_option("--max-seconds", rec.max_seconds);

  MonitorOpts mon;
  auto* c_mon = app.add_subcommand("monitor", "Live detection pipeline");
  c_mon->add_option("--host", mon.host);
  c_mon->add_option("--port", mon.port);
  c_mon->add_option("--weights", mon.weights, "Weight container");
  c_mon->add_option("--montage", mon.montage_file, "Montage config file");
  c_mon->add_option("--detector", mon.detector,
                    "model | bandpower-fixture (test oracle)");
  c_mon->add_option("--threshold", mon.threshold);
  c_mon->add_option("--record", mon.record_out, "Also record a session file");
  c_mon->add_option("--max-seconds", mon.max_seconds);

  DetectOpts det;
  auto* c_det = app.add_subcommand("detect", "Offline epoch scoring");
  c_det->add_option("--input", det.input, "Session or EDF file")->required();
  c_det->add_option("--weights", det.weights);
  c_det->add_option("--montage", det.montage_file);
  c_det->add_option("--threshold", det.threshold);
  c_det->add_option("--relevance", det.relevance_out, "Relevance dump file");
  c_det->add_option("--hop", det.hop_s, "Epoch hop [s]");

  CleanOpts cln;
  auto* c_cln = app.add_subcommand("clean", "ICA artifact removal");
  c_cln->add_option("--input", cln.input)->required();
  c_cln->add_option("--out", cln.out, "Cleaned output (.edf exports EDF)")
      ->required();
  c_cln->add_option("--report", cln.report_out, "Per-component report");
  c_cln->add_option("--window", cln.window_s, "Analysis window [s]");
  c_cln->add_option("--seed", cln.seed);

  AnalyzeOpts ana;
  auto* c_ana = app.add_subcommand("analyze", "Cross-device signal quality");
  c_ana->add_option("--a", ana.file_a)->required();
  c_ana->add_option("--b", ana.file_b)->required();
  c_ana->add_option("--states", ana.states, "State annotation file")
      ->required();
  c_ana->add_option("--report", ana.report_out);
  c_ana->add_option("--spectra", ana.spectra_prefix,
                    "Per-state spectrum files prefix");

  PrepareOpts prep;
  auto* c_prep = app.add_subcommand("prepare", "EDF corpus -> epoch tensors");
  c_prep->add_option("--edf-dir", prep.edf_dir)->required();
  c_prep->add_option("--annotations", prep.annotations_dir,
                     "Annotation directory (default: alongside the EDFs)");
  c_prep->add_option("--out", prep.out)->required();
  c_prep->add_flag("--stream-mode", prep.stream_mode,
                   "Fixed hop instead of 11 s/10 s overlap");
  c_prep->add_option("--hop", prep.hop_s, "Stream-mode hop [s]");

  FilterDesignOpts fd;
  auto* c_fd = app.add_subcommand("filter-design",
                                  "Dump second-order-section coefficients");
  c_fd->add_option("--type", fd.type,
                   "butterworth-bandpass | notch | cheby2-bandpass")
      ->required();
  c_fd->add_option("--order", fd.order);
  c_fd->add_option("--lo", fd.lo, "Low edge [Hz, or cycles/sample when no --fs]");
  c_fd->add_option("--hi", fd.hi, "High edge");
  c_fd->add_option("--fs", fd.fs, "Sampling rate [Hz]");
  c_fd->add_option("--center", fd.center, "Notch center [Hz]");
  c_fd->add_option("--bw", fd.bw, "Notch -3 dB bandwidth [Hz]");
  c_fd->add_option("--atten", fd.atten_db, "Stopband attenuation [dB]");
  c_fd->add_flag("--nyquist-edges", fd.nyquist_edges,
                 "Interpret normalized edges as fractions of Nyquist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const AppConfig cfg = AppConfig::resolve(config_path);
    if (c_sim->parsed()) return cmd_simulate(cfg, sim);
    if (c_rec->parsed()) return cmd_record(cfg, rec);
    if (c_mon->parsed()) return cmd_monitor(cfg, mon);
    if (c_det->parsed()) return cmd_detect(cfg, det);
    if (c_cln->parsed()) return cmd_clean(cfg, cln);
    if (c_ana->parsed()) return cmd_analyze(cfg, ana);
    if (c_prep->parsed()) return cmd_prepare(cfg, prep);
    if (c_fd->parsed()) return cmd_filter_design(fd);
    return 1;
  } catch (const neo::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const neo::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const neo::ProtocolError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const neo::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
