#include "catalyst/profile.hpp"

#include <stdexcept>

namespace catalyst {

namespace {

// Kahan-compensated accumulator for the conditional-expectation sums.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

void require_finite_support(const RuntimeDistribution& dist) {
  if (dist.atoms().empty())
    throw std::domain_error("law has no finite atom; no threshold exists");
}

}  // namespace

double proxy_runtime(const RuntimeDistribution& dist, Tick t) {
  const double p = dist.cdf(t);
  if (p <= 0.0) throw std::domain_error("proxy runtime undefined: P[X <= t] = 0");
  return static_cast<double>(t) / p;
}

double expected_ttl_runtime(const RuntimeDistribution& dist, Tick t) {
  const double p = dist.cdf(t);
  if (p <= 0.0) throw std::domain_error("restart cost undefined: P[X <= t] = 0");
  Kahan weighted;  // sum of x * P[X = x] over x <= t
  for (const auto& [tick, mass] : dist.atoms()) {
    if (tick > t) break;
    weighted.add(static_cast<double>(tick) * mass);
  }
  const double conditional = weighted.sum / p;
  return conditional + (1.0 - p) / p * static_cast<double>(t);
}

std::pair<Ttl, double> optimal_threshold(const RuntimeDistribution& dist) {
  require_finite_support(dist);
  Ttl best_t = 0;
  double best_f = 0.0;
  bool first = true;
  for (const auto& [tick, mass] : dist.atoms()) {
    (void)mass;
    const double f = expected_ttl_runtime(dist, tick);
    if (first || f < best_f) {  // strict <: ties keep the smallest t
      best_t = tick;
      best_f = f;
      first = false;
    }
  }
  return {best_t, best_f};
}

Profile compute_profile(const RuntimeDistribution& dist) {
  require_finite_support(dist);
  Profile p;
  bool first = true;
  for (const auto& [tick, mass] : dist.atoms()) {
    (void)mass;
    const double r = proxy_runtime(dist, tick);
    if (first || r < p.work) {
      p.t_star = tick;
      p.work = r;
      first = false;
    }
  }
  p.inv_p = 1.0 / dist.cdf(p.t_star);
  p.work = static_cast<double>(p.t_star) * p.inv_p;  // exact identity
  auto [delta, f] = optimal_threshold(dist);
  p.opt_threshold = delta;
  p.opt_expected = f;
  return p;
}

}  // namespace catalyst
