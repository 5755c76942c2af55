#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "neo/stream/packet.hpp"
#include "neo/types.hpp"

namespace neo::stream {

/// Inclusive range of frame sequence numbers that never arrived.
struct GapReport {
  std::uint32_t from_seq = 0;
  std::uint32_t to_seq = 0;
};

struct DecodeStats {
  std::uint64_t packets_ok = 0;
  std::uint64_t crc_failures = 0;
  std::uint64_t framing_errors = 0;  // bad header after a magic match
  std::uint64_t bytes_skipped = 0;
  std::uint64_t frames_dropped = 0;  // out-of-order / duplicate seq
};

/// Robust packet-stream decoder: resynchronizes on the magic, drops and
/// counts CRC failures, reports seq gaps, and tolerates mid-stream joins.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);

  /// Frames decoded since the last call, strictly increasing seq.
  std::vector<SampleFrame> take_frames();

  const std::vector<GapReport>& gaps() const { return gaps_; }
  const DecodeStats& stats() const { return stats_; }

 private:
  void scan();

  std::vector<std::uint8_t> buf_;
  std::vector<SampleFrame> out_;
  std::vector<GapReport> gaps_;
  DecodeStats stats_;
  bool seen_any_ = false;
  std::uint32_t last_seq_ = 0;
};

}  // namespace neo::stream
