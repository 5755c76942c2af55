#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neo/types.hpp"

namespace neo::stream {

// Wire layout, fixed little-endian except ADC words:
//   magic   2B  0xA5 0x5A
//   version 1B
//   flags   1B
//   seq     4B  sequence number of the first frame
//   t_us    8B  timestamp of the first frame
//   n       1B  frames in payload, 1..25
//   payload n * (8 x int24 big-endian ADC + 3 x int16 accel + 3 x int16 gyro)
//   crc     2B  CRC-16/CCITT-FALSE over version..payload
// Frames within a packet are contiguous in seq at the nominal 250 Hz
// spacing (4000 us).
inline constexpr std::uint8_t kMagic0 = 0xA5;
inline constexpr std::uint8_t kMagic1 = 0x5A;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxFramesPerPacket = 25;
inline constexpr std::size_t kFrameWireSize = 8 * 3 + 3 * 2 + 3 * 2;  // 36
inline constexpr std::size_t kPacketHeaderSize = 17;  // magic..n
inline constexpr std::size_t kPacketCrcSize = 2;

constexpr std::size_t packet_wire_size(std::size_t n_frames) {
  return kPacketHeaderSize + n_frames * kFrameWireSize + kPacketCrcSize;
}

/// Serializes 1..25 seq-contiguous frames; throws ProtocolError otherwise.
std::vector<std::uint8_t> encode_packet(std::span<const SampleFrame> frames,
                                        std::uint8_t flags = 0);

struct DecodedPacket {
  std::uint8_t version = 0;
  std::uint8_t flags = 0;
  std::vector<SampleFrame> frames;
};

enum class PacketStatus { ok, need_more, bad_magic, bad_header, bad_crc };

/// Parses one packet that must start at buf[0]; consumed is set on ok.
PacketStatus try_decode_packet(std::span<const std::uint8_t> buf,
                               DecodedPacket& out, std::size_t& consumed);

}  // namespace neo::stream
