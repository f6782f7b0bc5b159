#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "catalyst/distribution.hpp"
#include "catalyst/rng.hpp"
#include "catalyst/ttl.hpp"
#include "catalyst/types.hpp"

namespace catalyst {

enum class StrategyKind {
  Single,         // one attempt with TTL = cap
  ParallelOr,     // p independent copies, first success wins
  Fixed,          // restart at a fixed TTL
  Counter,        // TTLs from the shared counter (Luby) sequence
  RandomZeta2,    // i.i.d. TTLs ~ zeta(2)
  RandomCounter,  // i.i.d. TTLs from the binary-counter law
  Wide,           // many copies at harmonic speeds, suspend/resume
  CounterCache,   // counter TTLs + bounded cache of suspended runs
};

enum class SlotPolicy {
  Unit,      // 1-tick slots on the harmonic schedule
  Doubling,  // each activation doubles the copy's accumulated runtime
};

const char* strategy_name(StrategyKind kind);

struct StrategySpec {
  StrategyKind kind = StrategyKind::Single;
  unsigned workers = 1;
  Ttl fixed_ttl = 0;                              // Fixed only
  SlotPolicy slot_policy = SlotPolicy::Doubling;  // Wide only
  std::uint64_t cache_capacity = 0;               // CounterCache only

  // Throws std::invalid_argument on violated invariants (workers >= 1;
  // Single implies workers = 1; Fixed needs ttl >= 1; CounterCache needs
  // capacity >= 1).
  void validate() const;
};

struct SimOutcome {
  bool success = false;
  Tick time_to_success = 0;  // strategy wall-clock ticks (cap when failed)
  Tick total_work = 0;       // granted ticks summed over all workers
  std::uint64_t attempts = 0;
  std::uint64_t seed = 0;
};

// One draw from the law; never_tick encodes a run that would never finish.
Tick sample_runtime(const RuntimeDistribution& dist, RngStream& rng);

// Restart strategies that kill on expiry (Single, Fixed, Counter,
// RandomZeta2, RandomCounter). Workers advance in lock-step; the counter
// sequence is shared across workers, random TTLs are worker-local.
SimOutcome simulate_ttl_strategy(const RuntimeDistribution& dist, const StrategySpec& spec,
                                 Tick cap, RngStream& rng);

// p independent draws, first finisher wins.
SimOutcome simulate_parallel_or(const RuntimeDistribution& dist, unsigned workers, Tick cap,
                                RngStream& rng);

// Schedule state for the wide search: copy i is due one more slot whenever
// the lead time reaches i * (run_ticks(i) + 1); copy i is first instantiated
// at lead time i.
class WideState {
 public:
  WideState();

  Tick now() const { return now_; }
  std::uint64_t instantiated() const { return run_ticks_.size(); }
  Tick run_ticks(std::uint64_t copy_id) const;  // 0 for never-instantiated ids
  Tick next_activation() const { return agenda_.top().first; }

  // Schedule primitives: pop the due copy (minimal activation, then minimal
  // id), instantiating it when fresh; credit it run ticks; put it back on
  // the agenda at its next due time.
  std::uint64_t pop_due();
  void credit(std::uint64_t copy_id, Tick ticks);
  void reschedule(std::uint64_t copy_id);

 private:
  using Entry = std::pair<Tick, std::uint64_t>;  // (activation, copy_id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> agenda_;
  std::vector<Tick> run_ticks_;  // per instantiated copy, 1-based ids
  std::uint64_t frontier_ = 1;   // smallest never-instantiated copy id
  Tick now_ = 0;
};

// Pops the due copy, grants it one tick, and reschedules it. Returns the
// copy id granted.
std::uint64_t wide_next_slot(WideState& state);

SimOutcome simulate_wide(const RuntimeDistribution& dist, Tick cap, RngStream& rng,
                         SlotPolicy policy);

// Introspection counters for the cached-restart simulation.
struct CacheProbe {
  std::uint64_t max_entries = 0;
  std::uint64_t evictions = 0;
  std::uint64_t resumes = 0;
};

// Counter TTLs; expired runs are suspended into a bounded cache keyed by
// accumulated ticks (lightest evicted first) and the heaviest run strictly
// below a new TTL is resumed, paying only the increment.
SimOutcome simulate_counter_cache(const RuntimeDistribution& dist, std::uint64_t capacity,
                                  Tick cap, RngStream& rng, CacheProbe* probe = nullptr);

// Dispatch on spec.kind with a fresh stream seeded by `seed`.
SimOutcome simulate(const RuntimeDistribution& dist, const StrategySpec& spec, Tick cap,
                    std::uint64_t seed);

// Independent trials with seeds base_seed, base_seed + 1, ...
std::vector<SimOutcome> run_trials(const RuntimeDistribution& dist, const StrategySpec& spec,
                                   Tick cap, std::uint64_t base_seed, std::uint64_t trials);

}  // namespace catalyst
