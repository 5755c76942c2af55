#include "neo/stream/packet.hpp"

#include <cstring>

#include "neo/errors.hpp"
#include "neo/stream/checksum.hpp"

namespace neo::stream {

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int b = 0; b < 8; ++b)
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
  }
  return crc;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void put_u16le(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xFF));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
}

void put_u32le(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i)
    v.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xFF));
}

void put_u64le(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i)
    v.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xFF));
}

void put_i24be(std::vector<std::uint8_t>& v, std::int32_t x) {
  const auto u = static_cast<std::uint32_t>(x) & 0xFFFFFF;
  v.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
  v.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
  v.push_back(static_cast<std::uint8_t>(u & 0xFF));
}

void put_i16le(std::vector<std::uint8_t>& v, std::int16_t x) {
  put_u16le(v, static_cast<std::uint16_t>(x));
}

std::uint16_t get_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | p[i];
  return x;
}

std::int32_t get_i24be(const std::uint8_t* p) {
  std::uint32_t u = (static_cast<std::uint32_t>(p[0]) << 16) |
                    (static_cast<std::uint32_t>(p[1]) << 8) |
                    static_cast<std::uint32_t>(p[2]);
  if (u & 0x800000) u |= 0xFF000000;  // sign-extend
  return static_cast<std::int32_t>(u);
}

std::int16_t get_i16le(const std::uint8_t* p) {
  return static_cast<std::int16_t>(get_u16le(p));
}

}  // namespace

std::vector<std::uint8_t> encode_packet(std::span<const SampleFrame> frames,
                                        std::uint8_t flags) {
  if (frames.empty() || frames.size() > kMaxFramesPerPacket)
    throw ProtocolError("encode_packet: frame count must be 1..25, got " +
                        std::to_string(frames.size()));
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].seq != frames[0].seq + i)
      throw ProtocolError("encode_packet: frames not seq-contiguous");
  }

  std::vector<std::uint8_t> out;
  out.reserve(packet_wire_size(frames.size()));
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kProtocolVersion);
  out.push_back(flags);
  put_u32le(out, frames[0].seq);
  put_u64le(out, frames[0].t_us);
  out.push_back(static_cast<std::uint8_t>(frames.size()));
  for (const auto& f : frames) {
    for (auto adc : f.adc) put_i24be(out, adc);
    for (auto a : f.accel) put_i16le(out, a);
    for (auto g : f.gyro) put_i16le(out, g);
  }
  const std::uint16_t crc = crc16_ccitt_false(
      std::span<const std::uint8_t>(out.data() + 2, out.size() - 2));
  put_u16le(out, crc);
  return out;
}

PacketStatus try_decode_packet(std::span<const std::uint8_t> buf,
                               DecodedPacket& out, std::size_t& consumed) {
  consumed = 0;
  if (buf.size() < 2) return PacketStatus::need_more;
  if (buf[0] != kMagic0 || buf[1] != kMagic1) return PacketStatus::bad_magic;
  if (buf.size() < kPacketHeaderSize) return PacketStatus::need_more;

  const std::uint8_t version = buf[2];
  const std::uint8_t flags = buf[3];
  const std::uint32_t seq0 = get_u32le(buf.data() + 4);
  const std::uint64_t t0 = get_u64le(buf.data() + 8);
  const std::uint8_t n = buf[16];
  if (version != kProtocolVersion || n < 1 || n > kMaxFramesPerPacket)
    return PacketStatus::bad_header;

  const std::size_t total = packet_wire_size(n);
  if (buf.size() < total) return PacketStatus::need_more;

  const std::uint16_t want = get_u16le(buf.data() + total - 2);
  const std::uint16_t got = crc16_ccitt_false(
      std::span<const std::uint8_t>(buf.data() + 2, total - 4));
  if (want != got) return PacketStatus::bad_crc;

  out.version = version;
  out.flags = flags;
  out.frames.clear();
  out.frames.reserve(n);
  const std::uint8_t* p = buf.data() + kPacketHeaderSize;
  for (std::uint8_t i = 0; i < n; ++i) {
    SampleFrame f;
    f.seq = seq0 + i;
    f.t_us = t0 + static_cast<std::uint64_t>(i) * kFrameIntervalUs;
    for (auto& adc : f.adc) {
      adc = get_i24be(p);
      p += 3;
    }
    for (auto& a : f.accel) {
      a = get_i16le(p);
      p += 2;
    }
    for (auto& g : f.gyro) {
      g = get_i16le(p);
      p += 2;
    }
    out.frames.push_back(f);
  }
  consumed = total;
  return PacketStatus::ok;
}

}  // namespace neo::stream
