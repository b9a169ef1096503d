#pragma once

#include <cstddef>
#include <cstdint>

namespace navfly {

/// CRC-32 (IEEE 802.3, reflected 0xEDB88320), the zlib polynomial.
inline std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0) {
  static const auto table = [] {
    struct Table {
      std::uint32_t v[256];
    } t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t.v[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) crc = table.v[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace navfly
