#pragma once

#include <cstdint>
#include <limits>

namespace catalyst {

// Discrete time unit. All strategy arithmetic is in whole ticks; the executor
// maps one tick to a configurable wall-clock duration.
using Tick = std::uint64_t;

// A time-to-live grant for one run. Always >= 1; enforced at construction
// sites (samplers, parsers, strategy validation).
using Ttl = Tick;

// Sentinel for "this run never finishes on its own" (infinite hidden runtime).
inline constexpr Tick never_tick = std::numeric_limits<Tick>::max();

}  // namespace catalyst
