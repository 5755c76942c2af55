#include "neo/stream/decoder.hpp"

#include <algorithm>

namespace neo::stream {

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  scan();
}

std::vector<SampleFrame> StreamDecoder::take_frames() {
  std::vector<SampleFrame> f;
  f.swap(out_);
  return f;
}

void StreamDecoder::scan() {
  std::size_t pos = 0;
  while (pos + 2 <= buf_.size()) {
    // hunt for the magic
    if (buf_[pos] != kMagic0 || buf_[pos + 1] != kMagic1) {
      ++pos;
      ++stats_.bytes_skipped;
      continue;
    }
    DecodedPacket pkt;
    std::size_t consumed = 0;
    const auto status = try_decode_packet(
        std::span<const std::uint8_t>(buf_.data() + pos, buf_.size() - pos),
        pkt, consumed);
    if (status == PacketStatus::need_more) break;
    if (status == PacketStatus::bad_header) {
      ++stats_.framing_errors;
      pos += 2;  // skip this magic, keep hunting
      stats_.bytes_skipped += 2;
      continue;
    }
    if (status == PacketStatus::bad_crc) {
      ++stats_.crc_failures;
      pos += 2;
      stats_.bytes_skipped += 2;
      continue;
    }
    // ok
    ++stats_.packets_ok;
    for (const auto& f : pkt.frames) {
      if (seen_any_) {
        if (f.seq <= last_seq_) {
          ++stats_.frames_dropped;
          continue;
        }
        if (f.seq > last_seq_ + 1)
          gaps_.push_back({last_seq_ + 1, f.seq - 1});
      }
      out_.push_back(f);
      last_seq_ = f.seq;
      seen_any_ = true;
    }
    pos += consumed;
  }
  buf_.erase(buf_.begin(),
             buf_.begin() + static_cast<std::ptrdiff_t>(pos));
}

}  // namespace neo::stream
