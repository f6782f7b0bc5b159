#include "catalyst/exec.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "catalyst/ttl.hpp"

extern char** environ;

namespace catalyst {

namespace fs = std::filesystem;

namespace {

// PATH lookup ahead of fork, so spawn failures surface as clean errors and
// the child only needs async-signal-safe calls. Returns an absolute path:
// the child chdirs into its workdir before exec, which would silently break
// relative command paths.
std::string resolve_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) == 0) return fs::absolute(name).string();
    throw exec_error("cannot execute '" + name + "': " + std::strerror(errno));
  }
  const char* path = ::getenv("PATH");
  const std::string paths = path ? path : "/usr/local/bin:/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= paths.size()) {
    const auto end = paths.find(':', start);
    std::string dir =
        paths.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (dir.empty()) dir = ".";
    const std::string candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return fs::absolute(candidate).string();
    if (end == std::string::npos) break;
    start = end + 1;
  }
  throw exec_error("executable not found in PATH: " + name);
}

// Non-blocking reap; remembers the exit status.
void try_reap(ManagedRun& run) {
  if (run.exit_status || run.pgid <= 0) return;
  int st = 0;
  if (::waitpid(run.pgid, &st, WNOHANG) == run.pgid) run.exit_status = st;
}

void reap_blocking(ManagedRun& run) {
  if (run.exit_status || run.pgid <= 0) return;
  int st = 0;
  pid_t r;
  do {
    r = ::waitpid(run.pgid, &st, 0);
  } while (r < 0 && errno == EINTR);
  if (r == run.pgid) run.exit_status = st;
}

// SIGKILL the whole group (sweeps grandchildren) and reap the child.
void terminate_group_now(ManagedRun& run) {
  if (run.pgid > 0) ::kill(-run.pgid, SIGKILL);
  reap_blocking(run);
}

Tick ceil_div(Tick a, Tick b) { return a == 0 ? 0 : (a - 1) / b + 1; }

void remove_workdir(ManagedRun& run, bool keep) {
  if (keep || run.workdir.empty()) return;
  std::error_code ec;
  fs::remove_all(run.workdir, ec);
}

}  // namespace

ManagedRun spawn_run(const std::vector<std::string>& command, const fs::path& workdir) {
  if (command.empty()) throw exec_error("spawn: empty command");
  const std::string exe = resolve_executable(command[0]);
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec)
    throw exec_error("spawn: cannot create workdir " + workdir.string() + ": " + ec.message());
  const fs::path abs_dir = fs::absolute(workdir);
  const fs::path success = abs_dir / "success";

  // Environment and argv are fully materialized before fork: the child may
  // not allocate (another thread could hold the heap lock).
  const std::string wd_entry = std::string(env_workdir) + "=" + abs_dir.string();
  const std::string sf_entry = std::string(env_success_file) + "=" + success.string();
  std::vector<std::string> env_store;
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string_view entry{*e};
    const auto key = entry.substr(0, entry.find('='));
    if (key == env_workdir || key == env_success_file) continue;
    env_store.emplace_back(entry);
  }
  env_store.push_back(wd_entry);
  env_store.push_back(sf_entry);
  std::vector<char*> envp;
  envp.reserve(env_store.size() + 1);
  for (auto& s : env_store) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::vector<std::string> args = command;
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (auto& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw exec_error(std::string("spawn: pipe failed: ") + std::strerror(errno));

  const pid_t child = ::fork();
  if (child < 0) {
    const int err = errno;
    ::close(fds[0]);
    ::close(fds[1]);
    throw exec_error(std::string("spawn: fork failed: ") + std::strerror(err));
  }
  if (child == 0) {
    ::setpgid(0, 0);
    int err = 0;
    if (::chdir(abs_dir.c_str()) == 0) {
      ::execve(exe.c_str(), argv.data(), envp.data());
    }
    err = errno;
    [[maybe_unused]] auto n = ::write(fds[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(fds[1]);
  ::setpgid(child, child);  // either side may win the race; failure is fine
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(fds[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(fds[0]);
  if (n > 0) {
    int st = 0;
    while (::waitpid(child, &st, 0) < 0 && errno == EINTR) {
    }
    throw exec_error("spawn: cannot start '" + exe + "': " + std::strerror(child_errno));
  }

  ManagedRun run;
  run.pgid = child;
  run.workdir = abs_dir;
  run.success_file = success;
  return run;
}

bool detect_success(ManagedRun& run, SuccessMode mode) {
  if (mode == SuccessMode::SentinelFile) {
    std::error_code ec;
    return fs::exists(run.success_file, ec);
  }
  try_reap(run);
  return run.exit_status && WIFEXITED(*run.exit_status) && WEXITSTATUS(*run.exit_status) == 0;
}

bool run_alive(ManagedRun& run) {
  if (run.pgid <= 0) return false;
  try_reap(run);
  return !run.exit_status.has_value();
}

void kill_run(ManagedRun& run) {
  if (run.pgid <= 0) return;
  if (!run_alive(run)) {
    ::kill(-run.pgid, SIGKILL);  // sweep possible grandchildren
    run.status = RunStatus::Killed;
    return;
  }
  if (run.status == RunStatus::Suspended) {
    terminate_group_now(run);  // a stopped process cannot run handlers anyway
    run.status = RunStatus::Killed;
    return;
  }
  ::kill(-run.pgid, SIGTERM);
  const auto grace_end = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (std::chrono::steady_clock::now() < grace_end) {
    try_reap(run);
    if (run.exit_status) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  terminate_group_now(run);
  run.status = RunStatus::Killed;
}

EnforceResult enforce_ttl(ManagedRun& run, Tick grant, ExpiryMode mode,
                          const EnforceContext& ctx) {
  if (grant == 0) throw std::invalid_argument("enforce_ttl: grant must be >= 1");
  if (ctx.tick.count() <= 0.0) throw std::invalid_argument("enforce_ttl: tick must be > 0");
  if (run.status == RunStatus::Succeeded || run.status == RunStatus::Killed)
    throw std::invalid_argument("enforce_ttl: run is not live");

  using clock = std::chrono::steady_clock;
  const double tick_s = ctx.tick.count();
  const double poll_s = std::clamp(tick_s / 10.0, 0.005, 0.100);
  // Expiry slack so a run whose hidden time equals its TTL can still signal
  // despite startup and polling latency. Never charged: accounting is
  // clamped to the grant.
  const double grace_s = std::max(tick_s / 2.0, 2.0 * poll_s);

  if (run.status == RunStatus::Suspended) {
    if (::kill(-run.pgid, SIGCONT) != 0 && run_alive(run)) {
      const std::string why = std::strerror(errno);
      terminate_group_now(run);
      run.status = RunStatus::Killed;
      throw exec_error("enforce_ttl: cannot resume group: " + why);
    }
    run.status = RunStatus::Running;
  }

  const auto start = clock::now();
  const double budget_s = std::min(static_cast<double>(grant) * tick_s + grace_s, 1.0e9);
  auto deadline =
      start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(budget_s));
  if (ctx.hard_deadline.time_since_epoch().count() != 0 && ctx.hard_deadline < deadline)
    deadline = ctx.hard_deadline;

  // Whole-tick charge for the wall time used, at least 1, at most the grant.
  const auto charge = [&](clock::time_point now) {
    const double elapsed = std::chrono::duration<double>(now - start).count();
    const auto ticks = static_cast<Tick>(std::ceil(elapsed / tick_s));
    return std::min<Tick>(grant, std::max<Tick>(Tick{1}, ticks));
  };

  for (;;) {
    const auto now = clock::now();
    if (detect_success(run, ctx.success_mode)) {
      run.accumulated_ticks += charge(now);
      run.status = RunStatus::Succeeded;
      terminate_group_now(run);
      return EnforceResult::Succeeded;
    }
    if (!run_alive(run)) {
      // Died without signalling: re-check once to close the write/exit race.
      if (detect_success(run, ctx.success_mode)) continue;
      run.accumulated_ticks += charge(now);
      ::kill(-run.pgid, SIGKILL);
      reap_blocking(run);
      run.status = RunStatus::Killed;
      return EnforceResult::Expired;
    }
    const bool stopping = ctx.stop != nullptr && ctx.stop->load(std::memory_order_relaxed);
    if (now >= deadline || stopping) {
      run.accumulated_ticks += charge(now);
      if (stopping || mode == ExpiryMode::Kill) {
        kill_run(run);
      } else if (::kill(-run.pgid, SIGSTOP) == 0) {
        run.status = RunStatus::Suspended;
      } else if (run_alive(run)) {
        const std::string why = std::strerror(errno);
        terminate_group_now(run);
        run.status = RunStatus::Killed;
        throw exec_error("enforce_ttl: cannot suspend group: " + why);
      } else {
        run.status = RunStatus::Killed;  // exited right at expiry
      }
      return EnforceResult::Expired;
    }
    const auto poll = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(poll_s));
    std::this_thread::sleep_for(std::min<clock::duration>(poll, deadline - now));
  }
}

void AssignmentDispenser::store(const Assignment&, ManagedRun run) {
  kill_run(run);  // stop-start strategies never hand runs back
}

namespace {

// single / parallel: a fixed number of cap-long assignments.
class BoundedDispenser final : public AssignmentDispenser {
 public:
  BoundedDispenser(Ttl ttl, std::uint64_t limit) : ttl_(ttl), limit_(limit) {}
  std::optional<Assignment> next(RngStream&) override {
    if (count_.fetch_add(1) >= limit_) return std::nullopt;
    return Assignment{ttl_, ttl_, std::nullopt, 0};
  }

 private:
  Ttl ttl_;
  std::uint64_t limit_;
  std::atomic<std::uint64_t> count_{0};
};

class FixedDispenser final : public AssignmentDispenser {
 public:
  explicit FixedDispenser(Ttl ttl) : ttl_(ttl) {}
  std::optional<Assignment> next(RngStream&) override {
    return Assignment{ttl_, ttl_, std::nullopt, 0};
  }

 private:
  Ttl ttl_;
};

class CounterDispenser final : public AssignmentDispenser {
 public:
  std::optional<Assignment> next(RngStream&) override {
    std::lock_guard lk(mu_);
    const Ttl t = luby_.next();
    return Assignment{t, t, std::nullopt, 0};
  }

 private:
  std::mutex mu_;
  LubyGenerator luby_;
};

// zeta2 / bin: worker-local samples, no shared state.
class RandomDispenser final : public AssignmentDispenser {
 public:
  explicit RandomDispenser(bool zeta) : zeta_(zeta) {}
  std::optional<Assignment> next(RngStream& rng) override {
    const Ttl t = zeta_ ? sample_zeta2(rng) : sample_bin(rng);
    return Assignment{t, t, std::nullopt, 0};
  }

 private:
  bool zeta_;
};

class CacheDispenser final : public AssignmentDispenser {
 public:
  CacheDispenser(std::uint64_t capacity, RunReaper reaper)
      : capacity_(capacity), reaper_(std::move(reaper)) {}

  std::optional<Assignment> next(RngStream&) override {
    std::lock_guard lk(mu_);
    const Ttl ttl = luby_.next();
    // heaviest suspended run strictly below the TTL, oldest among equals
    auto above = held_.lower_bound({ttl, 0});
    if (above != held_.begin()) {
      const Tick heaviest = std::prev(above)->first.first;
      const auto pick = held_.lower_bound({heaviest, 0});
      Assignment a{ttl, ttl - pick->first.first, std::move(pick->second), 0};
      held_.erase(pick);
      return a;
    }
    return Assignment{ttl, ttl, std::nullopt, 0};
  }

  void store(const Assignment&, ManagedRun run) override {
    std::lock_guard lk(mu_);
    held_.emplace(std::pair<Tick, std::uint64_t>{run.accumulated_ticks, births_++},
                  std::move(run));
    if (held_.size() > capacity_) {
      const auto victim = held_.begin();  // lightest, oldest
      reaper_(victim->second);
      held_.erase(victim);
    }
  }

  void drain() override {
    std::lock_guard lk(mu_);
    for (auto& [key, run] : held_) reaper_(run);
    held_.clear();
  }

 private:
  std::mutex mu_;
  LubyGenerator luby_;
  std::map<std::pair<Tick, std::uint64_t>, ManagedRun> held_;
  std::uint64_t capacity_;
  std::uint64_t births_ = 0;
  RunReaper reaper_;
};

class WideDispenser final : public AssignmentDispenser {
 public:
  WideDispenser(SlotPolicy policy, std::uint64_t suspended_cap, RunReaper reaper)
      : policy_(policy), suspended_cap_(suspended_cap), reaper_(std::move(reaper)) {
    agenda_.insert({1, 1});
  }

  std::optional<Assignment> next(RngStream&) override {
    std::lock_guard lk(mu_);
    const auto [at, id] = *agenda_.begin();
    (void)at;
    agenda_.erase(agenda_.begin());
    if (id == frontier_) {
      ticks_[id] = 0;
      ++frontier_;
      agenda_.insert({frontier_, frontier_});
    }
    const Tick r = ticks_[id];
    Assignment a;
    a.grant = policy_ == SlotPolicy::Unit ? 1 : std::max<Tick>(r, 1);
    a.ttl = r + a.grant;
    a.copy_id = id;
    const auto held = held_.find(id);
    if (held != held_.end()) {
      a.resumed = std::move(held->second);
      held_.erase(held);
    }
    return a;
  }

  void store(const Assignment& a, ManagedRun run) override {
    std::lock_guard lk(mu_);
    ticks_[a.copy_id] = run.accumulated_ticks;
    agenda_.insert({a.copy_id * (run.accumulated_ticks + 1), a.copy_id});
    held_.emplace(a.copy_id, std::move(run));
    if (held_.size() > suspended_cap_) {
      // too many paused processes: drop the lightest copy entirely
      auto victim = held_.begin();
      for (auto it = held_.begin(); it != held_.end(); ++it)
        if (it->second.accumulated_ticks < victim->second.accumulated_ticks) victim = it;
      agenda_.erase({victim->first * (ticks_[victim->first] + 1), victim->first});
      ticks_.erase(victim->first);
      reaper_(victim->second);
      held_.erase(victim);
    }
  }

  void drain() override {
    std::lock_guard lk(mu_);
    for (auto& [id, run] : held_) reaper_(run);
    held_.clear();
  }

 private:
  std::mutex mu_;
  SlotPolicy policy_;
  std::set<std::pair<Tick, std::uint64_t>> agenda_;  // (activation, copy)
  std::map<std::uint64_t, Tick> ticks_;
  std::map<std::uint64_t, ManagedRun> held_;
  std::uint64_t frontier_ = 1;
  std::uint64_t suspended_cap_;
  RunReaper reaper_;
};

}  // namespace

std::unique_ptr<AssignmentDispenser> make_dispenser(const StrategySpec& spec, Tick cap,
                                                    RunReaper reaper) {
  switch (spec.kind) {
    case StrategyKind::Single:
      return std::make_unique<BoundedDispenser>(cap, 1);
    case StrategyKind::ParallelOr:
      return std::make_unique<BoundedDispenser>(cap, spec.workers);
    case StrategyKind::Fixed:
      return std::make_unique<FixedDispenser>(spec.fixed_ttl);
    case StrategyKind::Counter:
      return std::make_unique<CounterDispenser>();
    case StrategyKind::RandomZeta2:
      return std::make_unique<RandomDispenser>(true);
    case StrategyKind::RandomCounter:
      return std::make_unique<RandomDispenser>(false);
    case StrategyKind::Wide:
      return std::make_unique<WideDispenser>(spec.slot_policy, 4ull * spec.workers,
                                             std::move(reaper));
    case StrategyKind::CounterCache:
      return std::make_unique<CacheDispenser>(spec.cache_capacity, std::move(reaper));
  }
  throw std::invalid_argument("unknown strategy kind");
}

std::vector<ExperimentRecord> run_experiment(const std::vector<std::string>& command,
                                             const ExperimentOptions& opt) {
  opt.strategy.validate();
  if (opt.cap < 1) throw std::invalid_argument("run_experiment: cap must be >= 1");
  if (opt.tick.count() <= 0.0)
    throw std::invalid_argument("run_experiment: tick must be > 0");
  const unsigned workers = opt.strategy.workers;

  fs::path root = opt.workdir_root;
  if (root.empty())
    root = fs::temp_directory_path() /
           ("catalyst-" + std::to_string(::getpid()) + "-" +
            std::to_string(
                std::chrono::steady_clock::now().time_since_epoch().count() & 0xffffff));
  fs::create_directories(root);

  std::vector<ExperimentRecord> records;
  records.reserve(opt.trials);
  for (std::uint64_t trial = 0; trial < opt.trials; ++trial) {
    ExperimentRecord rec;
    rec.strategy = opt.strategy;
    rec.seed = opt.seed + trial;

    const auto t0 = std::chrono::steady_clock::now();
    const double cap_s = std::min(static_cast<double>(opt.cap) * opt.tick.count(), 1.0e9);
    const auto wall_deadline =
        t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(cap_s));

    std::atomic<bool> stop{false};
    std::atomic<Tick> total_granted{0};
    std::atomic<std::uint64_t> dir_seq{0};
    std::mutex rec_mu;

    const RunReaper reaper = [&](ManagedRun& r) {
      kill_run(r);
      remove_workdir(r, opt.keep_failed_workdirs);
    };
    auto dispenser = make_dispenser(opt.strategy, opt.cap, reaper);
    const ExpiryMode expiry = (opt.strategy.kind == StrategyKind::Wide ||
                               opt.strategy.kind == StrategyKind::CounterCache)
                                  ? ExpiryMode::Suspend
                                  : ExpiryMode::Kill;

    const auto worker_body = [&](unsigned w) {
      RngStream rng = RngStream::derive(rec.seed, w);
      while (!stop.load() && std::chrono::steady_clock::now() < wall_deadline) {
        std::optional<Assignment> a = dispenser->next(rng);
        if (!a) break;
        if (stop.load()) {  // a win landed while we asked; don't spawn more
          if (a->resumed) dispenser->store(*a, std::move(*a->resumed));
          break;
        }
        ManagedRun run;
        try {
          Tick before = 0;
          if (a->resumed) {
            run = std::move(*a->resumed);
            before = run.accumulated_ticks;
          } else {
            const auto dir = root / ("t" + std::to_string(trial) + "-a" +
                                     std::to_string(dir_seq.fetch_add(1)));
            run = spawn_run(command, dir);
            std::lock_guard lk(rec_mu);
            rec.spawned.push_back(run.pgid);
          }
          EnforceContext ctx{opt.tick, opt.success_mode, wall_deadline, &stop};
          const EnforceResult res = enforce_ttl(run, a->grant, expiry, ctx);
          total_granted.fetch_add(run.accumulated_ticks - before);
          const bool suspended = run.status == RunStatus::Suspended;
          {
            std::lock_guard lk(rec_mu);
            rec.attempts.push_back({a->ttl, run.accumulated_ticks - before,
                                    res == EnforceResult::Succeeded ? "success"
                                    : suspended                     ? "suspended"
                                                                    : "expired"});
            if (res == EnforceResult::Succeeded) rec.success = true;
          }
          if (res == EnforceResult::Succeeded) {
            stop.store(true);
            remove_workdir(run, false);
            break;
          }
          if (suspended) {
            dispenser->store(*a, std::move(run));
          } else {
            kill_run(run);
            remove_workdir(run, opt.keep_failed_workdirs);
          }
        } catch (const std::exception& e) {
          if (run.pgid > 0) {
            kill_run(run);
            remove_workdir(run, opt.keep_failed_workdirs);
          }
          std::lock_guard lk(rec_mu);
          if (rec.error.empty()) rec.error = e.what();
          rec.attempts.push_back({a->ttl, 0, "error"});
          break;
        }
      }
    };

    if (workers == 1) {
      worker_body(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker_body, w);
      for (auto& th : pool) th.join();
    }
    dispenser->drain();

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.elapsed_ticks = rec.success ? ceil_div(total_granted.load(), workers) : opt.cap;
    records.push_back(std::move(rec));
  }
  std::error_code ec;
  fs::remove(root, ec);  // gone unless something was retained
  return records;
}

std::vector<pid_t> live_child_processes() {
  std::vector<pid_t> out;
  const pid_t self = ::getpid();
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator("/proc", ec)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name.find_first_not_of("0123456789") != std::string::npos) continue;
    std::ifstream stat(entry.path() / "stat");
    if (!stat) continue;
    std::string content;
    std::getline(stat, content);
    const auto close_paren = content.rfind(')');
    if (close_paren == std::string::npos) continue;
    std::istringstream rest(content.substr(close_paren + 1));
    char state = 0;
    long ppid = 0;
    rest >> state >> ppid;
    if (ppid == self && state != 'Z') out.push_back(static_cast<pid_t>(std::stol(name)));
  }
  return out;
}

unsigned default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, (hw * 3) / 4);
}

}  // namespace catalyst
