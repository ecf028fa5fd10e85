#pragma once

#include <cstdint>
#include <random>

namespace btrt {

using Rng = std::mt19937_64;

/// SplitMix64 stream, used to derive independent per-task seeds from one
/// master seed. Consecutive outputs are decorrelated, so replication r can
/// safely use the r-th value as its engine seed.
class SeedStream {
public:
  explicit SeedStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Seed for the i-th independent stream (stateless lookup).
  static std::uint64_t nth(std::uint64_t master, std::uint64_t i) {
    SeedStream s(master);
    std::uint64_t v = 0;
    for (std::uint64_t k = 0; k <= i; ++k) v = s.next();
    return v;
  }

private:
  std::uint64_t state_;
};

inline Rng make_engine(std::uint64_t seed) { return Rng(seed); }

}  // namespace btrt
