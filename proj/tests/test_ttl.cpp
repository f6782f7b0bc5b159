#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "catalyst/rng.hpp"
#include "catalyst/ttl.hpp"

using namespace catalyst;

namespace {

// Independent oracle: for c = 1, 2, ..., append every power of two dividing c,
// in increasing order.
std::vector<Ttl> luby_prefix_oracle(std::size_t n) {
  std::vector<Ttl> out;
  for (std::uint64_t c = 1; out.size() < n; ++c)
    for (Ttl p = 1; c % p == 0; p <<= 1) out.push_back(p);
  out.resize(n);
  return out;
}

std::vector<Ttl> luby_prefix(std::size_t n) {
  LubyGenerator gen;
  std::vector<Ttl> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen.next());
  return out;
}

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

TEST_CASE("luby: first emissions match the frozen sequence") {
  const std::vector<Ttl> want{1, 1, 2, 1, 1, 2, 4, 1};
  CHECK(luby_prefix(8) == want);

  LubyGenerator fresh;
  CHECK(fresh.next() == 1);
}

TEST_CASE("luby: batches for counters 6..8 match the hand oracle") {
  // Counter batches: c=6 -> 1,2 ; c=7 -> 1 ; c=8 -> 1,2,4,8.
  auto seq = luby_prefix(15);
  const std::vector<Ttl> tail(seq.begin() + 8, seq.end());
  CHECK(tail == std::vector<Ttl>{1, 2, 1, 1, 2, 4, 8});
}

TEST_CASE("luby: first 10^4 emissions equal the divisor oracle") {
  CHECK(luby_prefix(10000) == luby_prefix_oracle(10000));
}

TEST_CASE("luby: pending is the unemitted increasing power batch of counter") {
  LubyGenerator gen;
  gen.next();             // c=1 emitted
  gen.next();             // c=2, emitted 1
  CHECK(gen.counter() == 2);
  CHECK(gen.pending() == std::vector<Ttl>{2});
  gen.next();             // emitted 2
  CHECK(gen.pending().empty());
  // c=4 batch mid-way
  gen.next();             // c=3 -> 1
  gen.next();             // c=4 -> 1
  gen.next();             // c=4 -> 2
  CHECK(gen.counter() == 4);
  CHECK(gen.pending() == std::vector<Ttl>{4});
}

TEST_CASE("luby: counter overflow raises instead of wrapping") {
  LubyGenerator gen(UINT64_MAX);
  CHECK_THROWS_AS(gen.next(), std::overflow_error);
}

TEST_CASE("luby: S(i,k) sandwich over every prefix k <= 1e5") {
  LubyGenerator gen;
  std::array<std::uint64_t, 64> granted{};  // granted[i] = S(i, k)
  std::vector<unsigned> present;            // exponents seen so far, ascending
  for (std::size_t k = 1; k <= 100000; ++k) {
    Ttl t = gen.next();
    unsigned e = bit_length(t) - 1;
    if (granted[e] == 0) present.push_back(e);  // batches emit ascending, so `present` stays sorted
    granted[e] += t;
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = a + 1; b < present.size(); ++b) {
        const std::uint64_t lo = granted[present[b]];  // larger power
        const std::uint64_t hi = granted[present[a]];  // smaller power
        REQUIRE(lo <= hi);
        REQUIRE(hi <= 2 * lo);
      }
    }
  }
}

TEST_CASE("luby: doubling-prefix recursion as a multiset, i <= 14") {
  // Ignoring order, prefix of length 2^{i+2}-1 = two copies of the prefix of
  // length 2^{i+1}-1 plus one extra element 2^{i+1}.
  auto seq = luby_prefix((std::size_t{1} << 16) - 1);
  for (unsigned i = 0; i <= 14; ++i) {
    const std::size_t n_small = (std::size_t{1} << (i + 1)) - 1;
    const std::size_t n_big = (std::size_t{1} << (i + 2)) - 1;
    std::map<Ttl, std::uint64_t> small, big;
    for (std::size_t k = 0; k < n_small; ++k) ++small[seq[k]];
    for (std::size_t k = 0; k < n_big; ++k) ++big[seq[k]];
    std::map<Ttl, std::uint64_t> want;
    for (auto& [v, c] : small) want[v] = 2 * c;
    ++want[Ttl{1} << (i + 1)];
    REQUIRE(big == want);
  }
}

TEST_CASE("fixed_next is the constant schedule") {
  CHECK(fixed_next(1) == 1);
  CHECK(fixed_next(3) == 3);
  for (int i = 0; i < 1000; ++i) CHECK(fixed_next(5) == 5);
}

TEST_CASE("bit_length") {
  CHECK(bit_length(1) == 1);
  CHECK(bit_length(4) == 3);
  CHECK(bit_length(7) == 3);
  CHECK(bit_length(UINT64_MAX) == 64);
  CHECK_THROWS_AS(bit_length(0), std::domain_error);
  // cross-check against the floating-point definition 1 + floor(log2 t)
  for (Ttl t : {2ull, 3ull, 8ull, 1023ull, 1024ull, 1025ull, 999983ull})
    CHECK(bit_length(t) == 1u + static_cast<unsigned>(std::floor(std::log2(static_cast<double>(t)))));
}

TEST_CASE("zeta2 inversion: fixed uniforms hit the partial-sum oracle") {
  CHECK(zeta2_from_uniform(0.30) == 1);  // CDF(1) = 6/pi^2 ~ 0.6079
  CHECK(zeta2_from_uniform(0.70) == 2);  // CDF(2) ~ 0.7599
  CHECK(zeta2_from_uniform(0.0) == 1);
  CHECK_THROWS_AS(zeta2_from_uniform(1.0), std::domain_error);
  CHECK_THROWS_AS(zeta2_from_uniform(-0.1), std::domain_error);

  // Monotone non-decreasing in u.
  Ttl prev = 1;
  for (double u = 0.0; u < 1.0; u += 1e-3) {
    Ttl v = zeta2_from_uniform(u);
    CHECK(v >= prev);
    prev = v;
  }

  // Deep-tail branch: returned index must bracket the tail mass 1-u between
  // the closed-form bounds 6/(pi^2 i) <= P[X >= i] <= 6/(pi^2 (i-1)).
  for (double u : {1.0 - 1e-7, 1.0 - 1e-9, 1.0 - 1e-12}) {
    const double i = static_cast<double>(zeta2_from_uniform(u));
    CHECK(6.0 / (pi2 * (i + 1.0)) <= (1.0 - u) * (1.0 + 1e-9));
    CHECK((1.0 - u) <= 6.0 / (pi2 * (i - 1.0)) * (1.0 + 1e-9));
  }
}

TEST_CASE("zeta2 law: partial sums approach 1 and tail bound holds") {
  const long double c = 6.0L / (std::numbers::pi_v<long double> * std::numbers::pi_v<long double>);
  long double cdf = 0.0L;
  for (std::uint64_t n = 1; n <= 100000; ++n) {
    cdf += c / (static_cast<long double>(n) * static_cast<long double>(n));
    REQUIRE(cdf < 1.0L);
    if (n >= 2) {
      const long double tail = 1.0L - cdf;  // P[X >= n+1] under exact law; check bound at n+1
      REQUIRE(static_cast<double>(tail) <= 6.0 / (pi2 * static_cast<double>(n)) * (1 + 1e-12));
    }
  }
  CHECK(static_cast<double>(cdf) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("zeta2 sampler: empirical tails inside the sandwich, 1e6 samples") {
  RngStream rng(20240311);
  constexpr int n = 1'000'000;
  std::array<std::uint64_t, 52> at_least{};  // at_least[i] = #samples >= i, i <= 51
  for (int s = 0; s < n; ++s) {
    Ttl v = sample_zeta2(rng);
    for (std::uint64_t i = 2; i <= 51; ++i)
      if (v >= i) ++at_least[i];
  }
  for (std::uint64_t i = 2; i <= 50; ++i) {
    const double phat = static_cast<double>(at_least[i]) / n;
    const double sigma = std::sqrt(phat * (1.0 - phat) / n);
    const double lo = 6.0 / (pi2 * static_cast<double>(i));
    const double hi = 6.0 / (pi2 * static_cast<double>(i - 1));
    REQUIRE(phat >= lo - 3 * sigma);
    REQUIRE(phat <= hi + 3 * sigma);
  }
}

TEST_CASE("bin: scripted decision stream builds 101b = 5") {
  // Rounds: continue(+bit 0), continue(+bit 1), finalize.
  std::vector<bool> script{false, false, false, true, true};
  std::size_t pos = 0;
  auto coin = [&] { return script.at(pos++); };
  CHECK(sample_bin_with(coin) == 5);
  CHECK(pos == script.size());
}

TEST_CASE("bin: a never-finalizing stream overflows explicitly") {
  auto coin = [] { return false; };
  CHECK_THROWS_AS(sample_bin_with(coin), std::overflow_error);
}

TEST_CASE("bin sampler: length law and tail sandwich, 1e6 samples") {
  RngStream rng(777);
  constexpr int n = 1'000'000;
  std::array<std::uint64_t, 65> len_count{};
  const std::array<std::uint64_t, 6> ts{2, 3, 5, 8, 16, 100};
  std::array<std::uint64_t, 6> tail_count{};
  for (int s = 0; s < n; ++s) {
    Ttl v = sample_bin(rng);
    ++len_count[bit_length(v)];
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (v >= ts[j]) ++tail_count[j];
  }
  for (unsigned k = 1; k <= 12; ++k) {
    const double p = std::pow(0.5, k);
    const double phat = static_cast<double>(len_count[k]) / n;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    REQUIRE(std::abs(phat - p) <= 3 * sigma);
  }
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double t = static_cast<double>(ts[j]);
    const double phat = static_cast<double>(tail_count[j]) / n;
    const double sigma = std::sqrt(phat * (1.0 - phat) / n);
    REQUIRE(phat >= 1.0 / t - 3 * sigma);
    REQUIRE(phat <= 2.0 / t + 3 * sigma);
  }
}

TEST_CASE("bin sampler: conditioned on length 4, values uniform on 8..15") {
  RngStream rng(424242);
  constexpr std::size_t want = 100000;
  std::array<std::uint64_t, 8> cells{};
  std::size_t got = 0;
  while (got < want) {
    Ttl v = sample_bin(rng);
    if (bit_length(v) == 4) {
      ++cells[v - 8];
      ++got;
    }
  }
  const double expected = static_cast<double>(want) / 8.0;
  double chi2 = 0.0;
  for (auto c : cells) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  // upper 0.1% quantile of chi-square with 7 degrees of freedom
  CHECK(chi2 < 24.322);
}

TEST_CASE("samplers are deterministic under a fixed seed") {
  RngStream a(99), b(99);
  for (int i = 0; i < 2000; ++i) CHECK(sample_zeta2(a) == sample_zeta2(b));
  RngStream c(123), d(123);
  for (int i = 0; i < 2000; ++i) CHECK(sample_bin(c) == sample_bin(d));
}

TEST_CASE("k_front sorts non-increasing and is idempotent") {
  auto f = k_front({1, 7, 2, 3, 2, 7, 1, 1});
  CHECK(f.bars == std::vector<Ttl>{7, 7, 3, 2, 2, 1, 1, 1});
  CHECK(k_front({1}).bars == std::vector<Ttl>{1});
  CHECK(k_front({2, 1, 1}).bars == std::vector<Ttl>{2, 1, 1});
  CHECK(k_front(f.bars).bars == f.bars);
  CHECK_THROWS_AS(k_front({}), std::invalid_argument);
}

TEST_CASE("front_dominates looks up the ceil(x)-th bar") {
  auto f = k_front({7, 7, 3, 2, 2, 1, 1, 1});
  CHECK(front_dominates(f, 2.0, 7.0));
  CHECK_FALSE(front_dominates(f, 2.0, 8.0));
  CHECK(front_dominates(f, 1.0, static_cast<double>(f.bars[0])));
  CHECK(front_dominates(f, 1.5, 7.0));   // ceil -> bar 2
  CHECK(front_dominates(f, 8.0, 1.0));
  CHECK_FALSE(front_dominates(f, 8.5, 1.0));  // beyond the front
  CHECK_FALSE(front_dominates(f, 0.0, 1.0));  // no bar covers x <= 0
}
