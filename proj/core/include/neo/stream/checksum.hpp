#pragma once

#include <cstdint>
#include <span>

namespace neo::stream {

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

/// FNV-1a 64-bit, used for blob checksums.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                      std::uint64_t seed = 1469598103934665603ull);

}  // namespace neo::stream
