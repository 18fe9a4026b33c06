#ifndef RISFD_RNG_HPP
#define RISFD_RNG_HPP

#include <cstdint>
#include <random>

namespace risfd {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed and a stream
/// counter (splitmix64 over the pair). Runs that expand one master seed
/// into many workers use this so that results do not depend on
/// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream = 0) {
  return Rng(derive_seed(master, stream));
}

}  // namespace risfd

#endif  // RISFD_RNG_HPP
