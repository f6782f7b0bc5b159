#pragma once

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "catalyst/rng.hpp"
#include "catalyst/sim.hpp"
#include "catalyst/types.hpp"

namespace catalyst {

// Environment variables of the wrapper contract: the supervisor exports both
// to every child; the wrapped program signals success by creating the file
// named by the second one.
inline constexpr const char* env_workdir = "CATALYST_WORKDIR";
inline constexpr const char* env_success_file = "CATALYST_SUCCESS_FILE";

class exec_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunStatus { Running, Suspended, Succeeded, Killed };
enum class SuccessMode { SentinelFile, ExitCode };
enum class ExpiryMode { Kill, Suspend };
enum class EnforceResult { Succeeded, Expired };

// One supervised OS process (group). A run belongs to exactly one worker
// between dispenser interactions.
struct ManagedRun {
  pid_t pgid = -1;  // child pid == its process-group id
  Tick accumulated_ticks = 0;
  RunStatus status = RunStatus::Running;
  std::filesystem::path workdir;
  std::filesystem::path success_file;
  std::optional<int> exit_status;  // raw wait status once reaped
};

// Starts `command` in its own process group with cwd = workdir and the
// wrapper-contract environment set. Throws exec_error when the executable
// cannot be found or the OS spawn fails.
ManagedRun spawn_run(const std::vector<std::string>& command,
                     const std::filesystem::path& workdir);

// True once the run has signalled success: sentinel file present, or (in
// exit-code mode) the process exited with status 0.
bool detect_success(ManagedRun& run, SuccessMode mode);

// True while the child process has not terminated (suspended counts as
// alive). Reaps the child if it just exited.
bool run_alive(ManagedRun& run);

// Graceful termination of the whole group: SIGTERM, a 2 s grace period, then
// SIGKILL. Suspended runs are killed directly (they cannot run handlers).
void kill_run(ManagedRun& run);

struct EnforceContext {
  std::chrono::duration<double> tick{1.0};
  SuccessMode success_mode = SuccessMode::SentinelFile;
  // Absolute end of the trial's wall-clock budget; expiry may be cut short
  // by it.
  std::chrono::steady_clock::time_point hard_deadline;
  // Set by the coordinator on first success; observed between polls.
  const std::atomic<bool>* stop = nullptr;
};

// Lets the run execute for up to `grant` additional ticks (resuming it
// first when suspended). On success the group is terminated and whole-tick
// accounting (rounded up, clamped to the grant) is added to the run;
// on expiry the run is killed or suspended per `mode` and charged the full
// grant. Throws std::invalid_argument on grant = 0, exec_error when signal
// delivery fails (the run is then force-killed).
EnforceResult enforce_ttl(ManagedRun& run, Tick grant, ExpiryMode mode,
                          const EnforceContext& ctx);

// One TTL handed to a worker, possibly together with a suspended run to
// resume: grant = ttl - prior accumulated ticks.
struct Assignment {
  Ttl ttl = 0;
  Tick grant = 0;
  std::optional<ManagedRun> resumed;
  std::uint64_t copy_id = 0;  // wide-search bookkeeping
};

// Shared TTL source for a worker pool. next() returns nothing when the
// strategy hands out a bounded number of assignments (single, parallel).
// Implementations are thread-safe; evicted or drained runs are released
// through the reaper callback handed to make_dispenser.
class AssignmentDispenser {
 public:
  virtual ~AssignmentDispenser() = default;
  virtual std::optional<Assignment> next(RngStream& rng) = 0;
  // Give an expired-but-suspended run back (cache and wide strategies).
  virtual void store(const Assignment& assignment, ManagedRun run);
  // Kill everything still held; called once after the workers join.
  virtual void drain() {}
};

using RunReaper = std::function<void(ManagedRun&)>;

std::unique_ptr<AssignmentDispenser> make_dispenser(const StrategySpec& spec, Tick cap,
                                                    RunReaper reaper);

struct AttemptLog {
  Ttl ttl = 0;
  Tick granted = 0;
  std::string result;  // "success" | "expired" | "suspended" | "error"
};

struct ExperimentRecord {
  StrategySpec strategy;
  std::uint64_t seed = 0;
  bool success = false;
  Tick elapsed_ticks = 0;  // success: ceil(total granted / workers); else cap
  std::vector<AttemptLog> attempts;
  double wall_seconds = 0.0;
  std::vector<pid_t> spawned;  // every child started during the trial
  std::string error;           // first OS/spawn failure, when any
};

struct ExperimentOptions {
  StrategySpec strategy;  // strategy.workers is the pool size
  Tick cap = 3000;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::chrono::duration<double> tick{1.0};
  SuccessMode success_mode = SuccessMode::SentinelFile;
  std::filesystem::path workdir_root;  // empty: unique dir under the OS tmp
  bool keep_failed_workdirs = false;
};

// Runs `trials` independent trials of the strategy against the command:
// workers repeatedly take assignments and enforce TTLs until first success
// or the wall-clock cap. OS failures are recorded per trial, not thrown.
std::vector<ExperimentRecord> run_experiment(const std::vector<std::string>& command,
                                             const ExperimentOptions& opt);

// Pids of still-live direct children of this process (from /proc); empty
// after a clean experiment.
std::vector<pid_t> live_child_processes();

// floor(3/4 * hardware threads), at least 1.
unsigned default_worker_count();

}  // namespace catalyst
