#pragma once

#include <cstdint>
#include <random>

namespace rsfbm {

using Engine = std::mt19937_64;

/// Stream tags: Gaussian draws and A draws never share an engine, so turning the
/// scaling on or off leaves the Gaussian component of every path unchanged.
enum class Stream : std::uint64_t { gaussian = 0, scale = 1, aux = 2 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for (root, stream, index); a pure function so path i gets the same
/// engine no matter which thread generates it.
inline std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(root);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(stream) + 0x632be59bd9b4e019ULL));
  return splitmix64(s ^ index);
}

inline Engine make_engine(std::uint64_t root, Stream stream, std::uint64_t index) {
  return Engine(derive_seed(root, stream, index));
}

}  // namespace rsfbm
