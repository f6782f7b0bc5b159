#pragma once

#include <utility>

#include "catalyst/distribution.hpp"
#include "catalyst/types.hpp"

namespace catalyst {

// The quantities a restart scheduler needs from a runtime law:
//   t_star    minimizes the proxy runtime R(t) = t / P[X <= t]
//   inv_p     = 1 / P[X <= t_star]
//   work      = R(t_star) = t_star * inv_p
//   opt_threshold minimizes the exact restart cost f(t)
//   opt_expected  = f(opt_threshold)
struct Profile {
  double inv_p = 0.0;
  Tick t_star = 0;
  double work = 0.0;
  Ttl opt_threshold = 0;
  double opt_expected = 0.0;
};

// R(t) = t / P[X <= t]. Throws std::domain_error when P[X <= t] = 0.
double proxy_runtime(const RuntimeDistribution& dist, Tick t);

// Expected time to first success when restarting every t ticks:
//   f(t) = E[X | X <= t] + (P[X > t] / P[X <= t]) * t.
// Throws std::domain_error when P[X <= t] = 0.
double expected_ttl_runtime(const RuntimeDistribution& dist, Tick t);

// Minimize f over the finite support points (the minimizer of a discrete law
// always sits on one); ties break toward the smallest t. Throws
// std::domain_error when the law has no finite atom.
std::pair<Ttl, double> optimal_threshold(const RuntimeDistribution& dist);

// t_star/inv_p/work from minimizing R, plus the optimal_threshold outputs.
Profile compute_profile(const RuntimeDistribution& dist);

}  // namespace catalyst
