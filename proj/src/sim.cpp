#include "catalyst/sim.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace catalyst {

namespace {

Tick saturating_mul(Tick a, Tick b) {
  Tick r = 0;
  if (__builtin_mul_overflow(a, b, &r)) return never_tick;
  return r;
}

}  // namespace

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Single: return "single";
    case StrategyKind::ParallelOr: return "parallel";
    case StrategyKind::Fixed: return "fixed";
    case StrategyKind::Counter: return "counter";
    case StrategyKind::RandomZeta2: return "zeta2";
    case StrategyKind::RandomCounter: return "bin";
    case StrategyKind::Wide: return "wide";
    case StrategyKind::CounterCache: return "counter-cache";
  }
  return "?";
}

void StrategySpec::validate() const {
  if (workers < 1) throw std::invalid_argument("strategy: workers must be >= 1");
  if (kind == StrategyKind::Single && workers != 1)
    throw std::invalid_argument("strategy: single admits exactly one worker");
  if (kind == StrategyKind::Fixed && fixed_ttl < 1)
    throw std::invalid_argument("strategy: fixed needs a TTL >= 1");
  if (kind == StrategyKind::CounterCache && cache_capacity < 1)
    throw std::invalid_argument("strategy: counter-cache needs capacity >= 1");
}

Tick sample_runtime(const RuntimeDistribution& dist, RngStream& rng) { return dist.sample(rng); }

SimOutcome simulate_ttl_strategy(const RuntimeDistribution& dist, const StrategySpec& spec,
                                 Tick cap, RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case StrategyKind::Single:
    case StrategyKind::Fixed:
    case StrategyKind::Counter:
    case StrategyKind::RandomZeta2:
    case StrategyKind::RandomCounter:
      break;
    default:
      throw std::invalid_argument("simulate_ttl_strategy: kill-on-expiry strategies only");
  }

  const unsigned w = spec.workers;
  std::vector<RngStream> streams;
  streams.reserve(w);
  for (unsigned i = 0; i < w; ++i) streams.emplace_back(rng.next_u64());

  LubyGenerator luby;  // shared across workers, consumed in pop order

  using Slot = std::pair<Tick, unsigned>;  // (free-at, worker)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<Slot>> ready;
  for (unsigned i = 0; i < w; ++i) ready.push({0, i});

  SimOutcome out;
  Tick best = never_tick;  // earliest success instant found so far
  while (!ready.empty()) {
    const auto [at, worker] = ready.top();
    // Pops come in time order, so nothing can start once the first success
    // (or the cap) has been reached.
    if (at >= cap || at >= best) break;
    ready.pop();

    Ttl ttl = 0;
    switch (spec.kind) {
      case StrategyKind::Single: ttl = cap; break;
      case StrategyKind::Fixed: ttl = spec.fixed_ttl; break;
      case StrategyKind::Counter: ttl = luby.next(); break;
      case StrategyKind::RandomZeta2: ttl = sample_zeta2(streams[worker]); break;
      case StrategyKind::RandomCounter: ttl = sample_bin(streams[worker]); break;
      default: break;
    }
    ++out.attempts;
    const Tick x = sample_runtime(dist, streams[worker]);
    const Tick room = cap - at;
    if (x <= ttl) {
      // This worker is done: it either wins or outlives the cap.
      if (x <= room) best = std::min(best, at + x);
    } else {
      ready.push({ttl >= room ? cap : at + ttl, worker});
    }
  }

  out.success = best != never_tick;
  const Tick elapsed = out.success ? best : cap;
  out.time_to_success = elapsed;
  out.total_work = saturating_mul(w, elapsed);
  return out;
}

SimOutcome simulate_parallel_or(const RuntimeDistribution& dist, unsigned workers, Tick cap,
                                RngStream& rng) {
  if (workers < 1) throw std::invalid_argument("parallel: workers must be >= 1");
  SimOutcome out;
  out.attempts = workers;
  Tick fastest = never_tick;
  for (unsigned i = 0; i < workers; ++i) fastest = std::min(fastest, sample_runtime(dist, rng));
  out.success = fastest <= cap;
  out.time_to_success = out.success ? fastest : cap;
  out.total_work = saturating_mul(workers, out.time_to_success);
  return out;
}

WideState::WideState() { agenda_.push({1, 1}); }

Tick WideState::run_ticks(std::uint64_t copy_id) const {
  if (copy_id == 0 || copy_id > run_ticks_.size()) return 0;
  return run_ticks_[copy_id - 1];
}

std::uint64_t WideState::pop_due() {
  const auto [at, id] = agenda_.top();
  agenda_.pop();
  now_ = at;
  if (id == frontier_) {
    run_ticks_.push_back(0);
    ++frontier_;
    agenda_.push({frontier_, frontier_});  // the next fresh copy is due at t = its id
  }
  return id;
}

void WideState::credit(std::uint64_t copy_id, Tick ticks) { run_ticks_[copy_id - 1] += ticks; }

void WideState::reschedule(std::uint64_t copy_id) {
  agenda_.push({saturating_mul(copy_id, run_ticks_[copy_id - 1] + 1), copy_id});
}

std::uint64_t wide_next_slot(WideState& state) {
  const auto id = state.pop_due();
  state.credit(id, 1);
  state.reschedule(id);
  return id;
}

SimOutcome simulate_wide(const RuntimeDistribution& dist, Tick cap, RngStream& rng,
                         SlotPolicy policy) {
  SimOutcome out;
  WideState st;
  std::vector<Tick> hidden;  // X_i per copy, drawn at instantiation

  const auto draw_if_fresh = [&] {
    if (hidden.size() < st.instantiated()) {
      hidden.push_back(sample_runtime(dist, rng));
      ++out.attempts;
    }
  };

  if (policy == SlotPolicy::Unit) {
    while (out.total_work < cap) {
      // All copies due at the same lead time advance together; success is
      // evaluated once the whole batch has run.
      const Tick lead = st.next_activation();
      bool done = false;
      while (st.next_activation() == lead && out.total_work < cap) {
        const auto id = st.pop_due();
        draw_if_fresh();
        st.credit(id, 1);
        ++out.total_work;
        st.reschedule(id);
        if (st.run_ticks(id) >= hidden[id - 1]) done = true;
      }
      if (done) {
        out.success = true;
        out.time_to_success = out.total_work;
        return out;
      }
    }
  } else {
    while (out.total_work < cap) {
      const auto id = st.pop_due();
      draw_if_fresh();
      const Tick r = st.run_ticks(id);
      const Tick x = hidden[id - 1];
      const Tick grant = std::min<Tick>(std::max<Tick>(r, 1), cap - out.total_work);
      const Tick need = x - r;  // x > r: the copy would have finished already
      if (need <= grant) {
        st.credit(id, need);
        out.total_work += need;
        out.success = true;
        out.time_to_success = out.total_work;
        return out;
      }
      st.credit(id, grant);
      out.total_work += grant;
      st.reschedule(id);
    }
  }
  out.time_to_success = cap;
  return out;
}

SimOutcome simulate_counter_cache(const RuntimeDistribution& dist, std::uint64_t capacity,
                                  Tick cap, RngStream& rng, CacheProbe* probe) {
  if (capacity < 1) throw std::invalid_argument("counter-cache: capacity must be >= 1");
  SimOutcome out;
  LubyGenerator luby;
  // Suspended runs keyed by (accumulated ticks, birth order): begin() is the
  // lightest-and-oldest (the eviction victim).
  std::map<std::pair<Tick, std::uint64_t>, Tick> cache;
  std::uint64_t births = 0;
  CacheProbe stats;

  while (out.total_work < cap) {
    const Ttl ttl = luby.next();
    ++out.attempts;

    // Adopt the heaviest suspended run strictly below the TTL (oldest among
    // equals), else start fresh.
    Tick accumulated = 0;
    Tick x = 0;
    auto above = cache.lower_bound({ttl, 0});
    if (above != cache.begin()) {
      const Tick heaviest = std::prev(above)->first.first;
      const auto pick = cache.lower_bound({heaviest, 0});
      accumulated = pick->first.first;
      x = pick->second;
      cache.erase(pick);
      ++stats.resumes;
    } else {
      x = sample_runtime(dist, rng);
    }

    const Tick grant = std::min<Tick>(ttl - accumulated, cap - out.total_work);
    const Tick need = x - accumulated;
    if (need <= grant) {
      out.total_work += need;
      out.success = true;
      out.time_to_success = out.total_work;
      break;
    }
    out.total_work += grant;
    if (grant == ttl - accumulated) {
      cache.emplace(std::pair<Tick, std::uint64_t>{accumulated + grant, births++}, x);
      if (cache.size() > capacity) {
        cache.erase(cache.begin());
        ++stats.evictions;
      }
      stats.max_entries = std::max<std::uint64_t>(stats.max_entries, cache.size());
    }
  }
  if (!out.success) out.time_to_success = cap;
  if (probe) *probe = stats;
  return out;
}

SimOutcome simulate(const RuntimeDistribution& dist, const StrategySpec& spec, Tick cap,
                    std::uint64_t seed) {
  spec.validate();
  RngStream rng(seed);
  SimOutcome out;
  switch (spec.kind) {
    case StrategyKind::ParallelOr:
      out = simulate_parallel_or(dist, spec.workers, cap, rng);
      break;
    case StrategyKind::Wide:
      out = simulate_wide(dist, cap, rng, spec.slot_policy);
      break;
    case StrategyKind::CounterCache:
      out = simulate_counter_cache(dist, spec.cache_capacity, cap, rng);
      break;
    default:
      out = simulate_ttl_strategy(dist, spec, cap, rng);
      break;
  }
  out.seed = seed;
  return out;
}

std::vector<SimOutcome> run_trials(const RuntimeDistribution& dist, const StrategySpec& spec,
                                   Tick cap, std::uint64_t base_seed, std::uint64_t trials) {
  std::vector<SimOutcome> out;
  out.reserve(trials);
  for (std::uint64_t i = 0; i < trials; ++i) out.push_back(simulate(dist, spec, cap, base_seed + i));
  return out;
}

}  // namespace catalyst
