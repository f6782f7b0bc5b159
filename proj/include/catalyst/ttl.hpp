#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "catalyst/rng.hpp"
#include "catalyst/types.hpp"

namespace catalyst {

// Universal restart sequence 1, 1, 2, 1, 1, 2, 4, 1, ...
//
// A counter c is incremented once per batch; batch c emits every power of two
// that divides c, in increasing order. The emission order within a batch is
// frozen (increasing) so that, for any prefix, the total time granted at TTL
// 2^i never exceeds twice the total granted at any smaller TTL present.
class LubyGenerator {
 public:
  LubyGenerator() = default;

  // Resume from an existing counter value; the batch for `counter` is treated
  // as already emitted.
  explicit LubyGenerator(std::uint64_t counter) : counter_(counter) {}

  // Next TTL in the sequence. Throws std::overflow_error when the counter
  // would wrap (wrapping silently would corrupt the schedule).
  Ttl next() {
    if (emit_next_ == emit_count_) {
      if (counter_ == UINT64_MAX)
        throw std::overflow_error("restart counter exceeds 64 bits");
      ++counter_;
      emit_count_ = trailing_zeros(counter_) + 1;
      emit_next_ = 0;
    }
    return Ttl{1} << emit_next_++;
  }

  std::uint64_t counter() const { return counter_; }

  // TTLs of the current batch not yet emitted, in emission order.
  std::vector<Ttl> pending() const {
    std::vector<Ttl> out;
    for (unsigned i = emit_next_; i < emit_count_; ++i) out.push_back(Ttl{1} << i);
    return out;
  }

 private:
  static unsigned trailing_zeros(std::uint64_t v) {
    unsigned n = 0;
    while ((v & 1) == 0) {
      v >>= 1;
      ++n;
    }
    return n;
  }

  std::uint64_t counter_ = 0;
  unsigned emit_next_ = 0;
  unsigned emit_count_ = 0;
};

// Constant schedule: every grant is delta. delta >= 1 is the caller's
// contract (validated where specs are built).
inline Ttl fixed_next(Ttl delta) { return delta; }

// Number of binary digits of t (1 -> 1, 4 -> 3, 7 -> 3).
// Throws std::domain_error for 0.
unsigned bit_length(Ttl t);

// Inversion of the law P[X = i] = (6 / pi^2) / i^2: smallest i whose
// cumulative mass reaches u. Exposed separately from the sampler so the
// inversion can be tested against fixed uniforms.
Ttl zeta2_from_uniform(double u);

// Heavy-tailed TTL draw with P[X = i] = (6 / pi^2) / i^2.
Ttl sample_zeta2(RngStream& rng);

// Random-bit-string TTL draw: start from the single bit 1; each round, stop
// with probability 1/2, otherwise append a uniform bit. The bit length is
// Geometric(1/2) and, given the length, the value is uniform.
//
// `coin` is any callable returning bool; per round the first flip decides
// stop-vs-extend (true = stop) and, when extending, the second flip is the
// appended bit. Throws std::overflow_error if the value would exceed 64 bits.
template <class Coin>
Ttl sample_bin_with(Coin&& coin) {
  Ttl value = 1;
  while (!coin()) {
    if (value >> 63)
      throw std::overflow_error("bit-string ttl exceeds 64 bits");
    value = (value << 1) | (coin() ? 1u : 0u);
  }
  return value;
}

Ttl sample_bin(RngStream& rng);

// Non-increasing bar graph of a TTL prefix: bar j (1-indexed) is the j-th
// largest TTL granted so far. Answers "has this schedule already dominated a
// given (count, height) demand?".
struct KFront {
  std::vector<Ttl> bars;  // sorted non-increasing

  std::size_t size() const { return bars.size(); }
};

// Build the front from an arbitrary TTL prefix. Throws std::invalid_argument
// on an empty prefix.
KFront k_front(std::vector<Ttl> ttls);

// True iff the front covers the point: ceil(x) <= size and the ceil(x)-th bar
// (1-indexed) is at least y.
bool front_dominates(const KFront& front, double x, double y);

}  // namespace catalyst
