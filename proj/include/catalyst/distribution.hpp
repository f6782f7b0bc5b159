#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "catalyst/rng.hpp"
#include "catalyst/types.hpp"

namespace catalyst {

// Discrete runtime law over whole ticks, with an explicit probability of
// never terminating. Atoms are kept sorted by tick; cumulative sums are
// precomputed for O(log n) CDF lookups and inversion sampling.
class RuntimeDistribution {
 public:
  // Validates: ticks >= 1 and distinct, probabilities in [0,1], total mass
  // (finite + infinite) = 1 within 1e-9, and at least one finite atom unless
  // infinite_mass = 1. Throws std::invalid_argument otherwise.
  static RuntimeDistribution from_atoms(std::vector<std::pair<Tick, double>> atoms,
                                        double infinite_mass = 0.0);

  const std::vector<std::pair<Tick, double>>& atoms() const { return atoms_; }
  double infinite_mass() const { return infinite_mass_; }

  // P[X <= t].
  double cdf(Tick t) const;
  // P[X > t], including the never-terminates mass.
  double tail(Tick t) const { return 1.0 - cdf(t); }

  // One draw by inversion: smallest atom (ordered by tick, infinity last)
  // whose cumulative mass reaches the uniform variate. Returns never_tick for
  // the infinite atom.
  Tick sample(RngStream& rng) const { return from_uniform(rng.next_double()); }
  Tick from_uniform(double u) const;

  Tick min_support() const { return atoms_.front().first; }

 private:
  RuntimeDistribution() = default;

  std::vector<std::pair<Tick, double>> atoms_;  // sorted by tick
  std::vector<double> cum_;                     // cumulative finite mass
  double infinite_mass_ = 0.0;
};

// Runtime observations from real or simulated executions, possibly censored
// by an experiment cap.
struct SampleSet {
  std::vector<Tick> successes;
  std::optional<Tick> censored_at;
  std::uint64_t n_censored = 0;

  double censored_fraction() const {
    const auto total = successes.size() + n_censored;
    return total == 0 ? 0.0 : static_cast<double>(n_censored) / static_cast<double>(total);
  }
};

// Frequency law of the observed success times; censored runs become mass at
// +infinity (the conservative direction for restart decisions). Throws
// std::invalid_argument when there are no successes or a success exceeds the
// cap.
RuntimeDistribution empirical_distribution(const SampleSet& samples);

}  // namespace catalyst
