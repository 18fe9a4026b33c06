#ifndef RISFD_HASH_HPP
#define RISFD_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace risfd {

/// FNV-1a over raw bytes; used for config and result fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace risfd

#endif  // RISFD_HASH_HPP
