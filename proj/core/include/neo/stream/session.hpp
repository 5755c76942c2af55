#pragma once

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "neo/epochs.hpp"
#include "neo/types.hpp"

namespace neo::stream {

// Chunked on-disk session format, designed for live tailing:
//
//   NEOSES1\n
//   key=value header lines (fs_hz, channels, chunk_samples, gain, vref_v,
//   device_id, montage, started_at), terminated by "end\n"
//
// followed by fixed-size binary chunks, each introduced by a 1-byte tag:
//   'D'  u64 first_sample_index,
//        f32 eeg[channel][chunk_samples] (channel-major, microvolts),
//        i16 imu[6][chunk_samples] (ax ay az gx gy gz)
//   'A'  f64 t0_s, f64 t1_s, char label[16] (zero-padded)
//
// A truncated final chunk (writer killed mid-write) is detected by a short
// read; everything before it stays valid.

struct SessionHeader {
  double fs_hz = 250.0;
  std::vector<std::string> channels;
  int chunk_samples = 250;
  SessionMeta meta;
};

class SessionWriter {
 public:
  SessionWriter(const std::string& path, SessionHeader header);
  ~SessionWriter();

  SessionWriter(const SessionWriter&) = delete;
  SessionWriter& operator=(const SessionWriter&) = delete;

  /// One multichannel sample (microvolts) plus the matching IMU reading.
  void push(const std::vector<double>& uv, const std::int16_t imu[6]);
  void push_frame_uv(const std::vector<double>& uv);  // zero IMU

  void annotate(const AnnotationSpan& span);

  /// Samples accepted so far (buffered tail included).
  std::uint64_t samples_written() const { return n_samples_; }

  void close();  // flushes complete chunks; buffered tail < chunk is dropped

 private:
  void write_chunk();

  SessionHeader hdr_;
  std::FILE* f_ = nullptr;
  std::vector<float> eeg_buf_;   // channel-major staging
  std::vector<std::int16_t> imu_buf_;
  int buffered_ = 0;
  std::uint64_t n_samples_ = 0;
  std::uint64_t chunk_first_ = 0;
};

struct SessionData {
  SessionHeader header;
  Recording recording;                  // microvolts
  std::vector<std::int16_t> imu;        // 6 per sample, sample-major
  std::vector<AnnotationSpan> annotations;
  bool truncated_tail = false;          // partial final chunk was discarded
};

/// Reads everything currently readable; safe on files still being written.
SessionData read_session(const std::string& path);

}  // namespace neo::stream
