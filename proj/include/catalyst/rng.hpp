#pragma once

#include <cstdint>
#include <random>

namespace catalyst {

// SplitMix64 finalizer; used to decorrelate nearby seeds and derive
// independent sub-streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic uniform source. Identical seeds yield identical streams on
// every platform: mt19937_64 is fully specified by the standard and the
// double conversion below avoids the implementation-defined
// std::uniform_real_distribution.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) on the 2^-53 grid.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Fair coin.
  bool next_bit() { return (gen_() >> 63) != 0; }

  std::uint64_t seed() const { return seed_; }

  // Independent sub-stream (worker streams, per-trial streams).
  static RngStream derive(std::uint64_t base, std::uint64_t stream_id) {
    return RngStream(splitmix64(base ^ splitmix64(stream_id + 1)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace catalyst
