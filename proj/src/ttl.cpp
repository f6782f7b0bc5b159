#include "catalyst/ttl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace catalyst {

namespace {

constexpr double zeta2_coeff() {
  return 6.0 / (std::numbers::pi * std::numbers::pi);
}

constexpr std::size_t zeta2_table_size = std::size_t{1} << 16;

// Cumulative mass of the first 2^16 atoms, accumulated in long double so the
// stored doubles are correctly rounded.
const std::vector<double>& zeta2_cdf_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(zeta2_table_size);
    const long double c = 6.0L / (std::numbers::pi_v<long double> * std::numbers::pi_v<long double>);
    long double acc = 0.0L;
    for (std::size_t i = 1; i <= zeta2_table_size; ++i) {
      acc += c / (static_cast<long double>(i) * static_cast<long double>(i));
      t[i - 1] = static_cast<double>(acc);
    }
    return t;
  }();
  return table;
}

// sum_{l >= n} 1/l^2 via the asymptotic series
//   1/n + 1/(2n^2) + 1/(6n^3) - 1/(30n^5) + 1/(42n^7);
// the first dropped term is O(n^-9), far below double precision for the
// n > 2^16 range where this is used.
double zeta2_tail_from(double n) {
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  return inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0));
}

// P[X >= n] for n beyond the prefix table. Comparisons happen on this tail
// side, never via 1 - cdf, which would quantize to the double spacing at 1.
double zeta2_tail_far(std::uint64_t n) {
  return zeta2_coeff() * zeta2_tail_from(static_cast<double>(n));
}

}  // namespace

unsigned bit_length(Ttl t) {
  if (t == 0) throw std::domain_error("bit_length of 0");
  unsigned n = 0;
  while (t != 0) {
    t >>= 1;
    ++n;
  }
  return n;
}

Ttl zeta2_from_uniform(double u) {
  if (!(u >= 0.0) || u >= 1.0) throw std::domain_error("uniform variate outside [0, 1)");
  const auto& table = zeta2_cdf_table();
  if (u <= table.back()) {
    auto it = std::lower_bound(table.begin(), table.end(), u);
    return static_cast<Ttl>(it - table.begin()) + 1;
  }
  // Tail: smallest i > 2^16 with cdf(i) >= u, i.e. with P[X >= i+1] <= 1-u.
  // 1-u is exact here (u is within 2^-17 of 1), so the search keeps full
  // relative precision on the tail.
  const double target = 1.0 - u;
  std::uint64_t lo = zeta2_table_size + 1;  // cdf(2^16) < u
  std::uint64_t hi = lo;
  while (zeta2_tail_far(hi + 1) > target) {
    if (hi > (UINT64_MAX >> 1)) throw std::overflow_error("zeta2 inversion exceeds 64 bits");
    hi *= 2;
  }
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (zeta2_tail_far(mid + 1) <= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

Ttl sample_zeta2(RngStream& rng) { return zeta2_from_uniform(rng.next_double()); }

Ttl sample_bin(RngStream& rng) {
  return sample_bin_with([&rng] { return rng.next_bit(); });
}

KFront k_front(std::vector<Ttl> ttls) {
  if (ttls.empty()) throw std::invalid_argument("k_front of empty prefix");
  std::sort(ttls.begin(), ttls.end(), std::greater<Ttl>());
  return KFront{std::move(ttls)};
}

bool front_dominates(const KFront& front, double x, double y) {
  const double cx = std::ceil(x);
  if (cx < 1.0) return false;
  if (cx > static_cast<double>(front.bars.size())) return false;
  const auto idx = static_cast<std::size_t>(cx);
  return static_cast<double>(front.bars[idx - 1]) >= y;
}

}  // namespace catalyst
