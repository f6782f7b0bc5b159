// Command-line frontend. Four subcommands:
//   sequence  print the first n TTLs of a restart schedule
//   analyze   estimate the restart profile from recorded runtimes
//   simulate  Monte-Carlo a strategy against a known runtime law
//   run       supervise a real command under a strategy
//
// Exit status: 0 when at least one trial succeeded (or the subcommand has no
// trials), 2 when every trial failed, 1 on usage or configuration errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "catalyst/exec.hpp"
#include "catalyst/io.hpp"
#include "catalyst/profile.hpp"
#include "catalyst/sim.hpp"
#include "catalyst/stats.hpp"
#include "catalyst/ttl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace catalyst;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_frac(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

StrategyKind kind_from_name(const std::string& name) {
  if (name == "single") return StrategyKind::Single;
  if (name == "parallel") return StrategyKind::ParallelOr;
  if (name == "fixed") return StrategyKind::Fixed;
  if (name == "counter") return StrategyKind::Counter;
  if (name == "zeta2") return StrategyKind::RandomZeta2;
  if (name == "bin") return StrategyKind::RandomCounter;
  if (name == "wide") return StrategyKind::Wide;
  if (name == "counter-cache") return StrategyKind::CounterCache;
  throw std::invalid_argument("unknown strategy: " + name);
}

// Shared strategy flags of simulate/run.
struct StrategyFlags {
  std::string name;
  unsigned workers = 1;
  Ttl ttl = 0;
  std::string policy = "doubling";
  std::uint64_t cache_capacity = 16;
};

void add_strategy_flags(CLI::App& cmd, StrategyFlags& f) {
  cmd.add_option("-s,--strategy", f.name,
                 "single | parallel | fixed | counter | zeta2 | bin | wide | counter-cache")
      ->required();
  cmd.add_option("--ttl", f.ttl, "restart threshold (fixed strategy)");
  cmd.add_option("--policy", f.policy, "wide grant policy")
      ->check(CLI::IsMember({"unit", "doubling"}));
  cmd.add_option("--cache-capacity", f.cache_capacity,
                 "suspended runs kept (counter-cache strategy)")
      ->check(CLI::PositiveNumber);
}

StrategySpec build_spec(const StrategyFlags& f) {
  StrategySpec s;
  s.kind = kind_from_name(f.name);
  s.workers = f.workers;
  s.fixed_ttl = f.ttl;
  s.slot_policy = f.policy == "unit" ? SlotPolicy::Unit : SlotPolicy::Doubling;
  s.cache_capacity = f.cache_capacity;
  s.validate();
  return s;
}

int cmd_sequence(const std::string& name, Ttl ttl, std::uint64_t n, std::uint64_t seed) {
  std::string out;
  if (name == "counter") {
    LubyGenerator luby;
    for (std::uint64_t i = 0; i < n; ++i) out += std::to_string(luby.next()) + "\n";
  } else if (name == "fixed") {
    if (ttl < 1) throw std::invalid_argument("fixed sequence needs --ttl >= 1");
    for (std::uint64_t i = 0; i < n; ++i) out += std::to_string(ttl) + "\n";
  } else if (name == "zeta2" || name == "bin") {
    RngStream rng(seed);
    for (std::uint64_t i = 0; i < n; ++i)
      out += std::to_string(name == "zeta2" ? sample_zeta2(rng) : sample_bin(rng)) + "\n";
  } else {
    kind_from_name(name);  // unknown names fail first
    throw std::invalid_argument(
        "sequence needs a ttl-schedule strategy (fixed, counter, zeta2, bin), got: " + name);
  }
  std::cout << out;
  return 0;
}

int cmd_analyze(const fs::path& samples_path) {
  const SampleSet samples = load_samples_csv(samples_path);
  const RuntimeDistribution law = empirical_distribution(samples);
  const Profile prof = compute_profile(law);

  const auto total = samples.successes.size() + samples.n_censored;
  std::cout << "samples " << total << " successes " << samples.successes.size()
            << " censored_fraction " << fmt_frac(samples.censored_fraction()) << "\n";
  std::cout << "profile 1/p " << fmt_g(prof.inv_p) << " t " << prof.t_star << "\n";
  std::cout << "work " << fmt_g(prof.work) << "\n";
  std::cout << "optimal ttl " << prof.opt_threshold << " expected "
            << fmt_g(prof.opt_expected) << "\n";
  if (samples.censored_fraction() > 0.20)
    std::cerr << "warning: more than 20% of the samples are censored; the empirical law "
                 "treats them as never finishing, so estimates lean conservative\n";
  std::cout << "t,f,R\n";
  for (const auto& [t, p] : law.atoms())
    std::cout << t << "," << fmt_g(expected_ttl_runtime(law, t)) << ","
              << fmt_g(proxy_runtime(law, t)) << "\n";
  return 0;
}

void write_trial_files(const fs::path& dir, const Report& report,
                       const std::vector<json>& trials) {
  fs::create_directories(dir);
  std::ofstream csv(dir / "report.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "report.csv").string());
  write_report_csv(csv, {report});
  std::ofstream jl(dir / "trials.jsonl");
  if (!jl) throw std::runtime_error("cannot write " + (dir / "trials.jsonl").string());
  for (const auto& j : trials) jl << j.dump() << "\n";
}

int cmd_simulate(const fs::path& dist_path, const StrategySpec& spec, Tick cap,
                 std::uint64_t trials, std::uint64_t seed,
                 const std::optional<fs::path>& out_dir) {
  if ((spec.kind == StrategyKind::Wide || spec.kind == StrategyKind::CounterCache) &&
      spec.workers > 1)
    throw std::invalid_argument(
        "simulate models wide and counter-cache with a single worker");
  const auto law = load_distribution_file(dist_path);
  const auto outcomes = run_trials(law, spec, cap, seed, trials);

  std::vector<TrialOutcome> rows;
  rows.reserve(outcomes.size());
  std::vector<json> lines;
  lines.reserve(outcomes.size());
  std::uint64_t successes = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    successes += o.success ? 1 : 0;
    rows.push_back({o.success, static_cast<double>(o.time_to_success)});
    lines.push_back(json{{"trial", i},
                         {"strategy", strategy_name(spec.kind)},
                         {"seed", o.seed},
                         {"success", o.success},
                         {"time_to_success", o.time_to_success},
                         {"total_work", o.total_work},
                         {"attempts", o.attempts}});
  }
  const Report report = summarize(strategy_name(spec.kind), rows);
  write_report_csv(std::cout, {report});
  if (out_dir) write_trial_files(*out_dir, report, lines);
  return successes > 0 ? 0 : 2;
}

int cmd_run(const std::vector<std::string>& command, const StrategySpec& spec,
            const ExperimentOptions& base_opt, const std::optional<fs::path>& out_dir) {
  ExperimentOptions opt = base_opt;
  opt.strategy = spec;
  const auto records = run_experiment(command, opt);

  std::vector<TrialOutcome> rows;
  rows.reserve(records.size());
  std::vector<json> lines;
  lines.reserve(records.size());
  std::uint64_t successes = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    successes += r.success ? 1 : 0;
    if (!r.error.empty())
      std::cerr << "catalyst: trial " << i << ": " << r.error << "\n";
    rows.push_back({r.success, static_cast<double>(r.elapsed_ticks)});
    json attempts = json::array();
    for (const auto& a : r.attempts)
      attempts.push_back(
          json{{"ttl", a.ttl}, {"granted", a.granted}, {"result", a.result}});
    lines.push_back(json{{"trial", i},
                         {"strategy", strategy_name(r.strategy.kind)},
                         {"seed", r.seed},
                         {"success", r.success},
                         {"elapsed_ticks", r.elapsed_ticks},
                         {"wall_seconds", r.wall_seconds},
                         {"spawned", r.spawned.size()},
                         {"error", r.error},
                         {"attempts", attempts}});
  }
  const Report report = summarize(strategy_name(spec.kind), rows);
  write_report_csv(std::cout, {report});
  if (out_dir) write_trial_files(*out_dir, report, lines);
  return successes > 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restart-strategy engine for black-box Las Vegas programs"};
  app.require_subcommand(1);
  int exit_code = 0;

  // --- sequence ---
  auto* seq = app.add_subcommand("sequence", "print the first n TTLs of a schedule");
  std::string seq_strategy;
  std::uint64_t seq_n = 0;
  std::uint64_t seq_seed = 0;
  Ttl seq_ttl = 0;
  seq->add_option("-s,--strategy", seq_strategy, "fixed | counter | zeta2 | bin")
      ->required();
  seq->add_option("-n,--count", seq_n, "how many TTLs to print")
      ->required()
      ->check(CLI::PositiveNumber);
  seq->add_option("--ttl", seq_ttl, "restart threshold (fixed strategy)");
  seq->add_option("--seed", seq_seed, "seed for the random schedules");
  seq->callback(
      [&] { exit_code = cmd_sequence(seq_strategy, seq_ttl, seq_n, seq_seed); });

  // --- analyze ---
  auto* ana = app.add_subcommand("analyze", "restart profile from recorded runtimes");
  std::string ana_samples;
  ana->add_option("samples", ana_samples, "CSV of runtime_ticks,censored rows")
      ->required()
      ->check(CLI::ExistingFile);
  ana->callback([&] { exit_code = cmd_analyze(ana_samples); });

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo a strategy on a runtime law");
  StrategyFlags sim_flags;
  std::string sim_dist;
  Tick sim_cap = 3000;
  std::uint64_t sim_trials = 1;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  add_strategy_flags(*sim, sim_flags);
  sim->add_option("--dist", sim_dist, "runtime distribution file")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("-w,--workers", sim_flags.workers, "simulated workers")
      ->check(CLI::PositiveNumber);
  sim->add_option("--cap", sim_cap, "per-trial budget in ticks")
      ->check(CLI::PositiveNumber);
  sim->add_option("--trials", sim_trials, "independent trials")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "base seed; trial i uses seed + i");
  sim->add_option("--out", sim_out, "directory for report.csv and trials.jsonl");
  sim->callback([&] {
    exit_code = cmd_simulate(
        sim_dist, build_spec(sim_flags), sim_cap, sim_trials, sim_seed,
        sim_out.empty() ? std::nullopt : std::optional<fs::path>(sim_out));
  });

  // --- run ---
  auto* run = app.add_subcommand("run", "supervise a real command under a strategy");
  StrategyFlags run_flags;
  run_flags.workers = default_worker_count();
  ExperimentOptions run_opt;
  double run_tick = 1.0;
  std::string run_out;
  std::string run_root;
  std::string run_success = "file";
  std::vector<std::string> run_command;
  add_strategy_flags(*run, run_flags);
  run->add_option("-w,--workers", run_flags.workers, "worker pool size")
      ->check(CLI::PositiveNumber);
  run->add_option("--cap", run_opt.cap, "per-trial budget in ticks")
      ->check(CLI::PositiveNumber);
  run->add_option("--trials", run_opt.trials, "independent trials")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", run_opt.seed, "base seed; trial i uses seed + i");
  run->add_option("--tick", run_tick, "tick length in seconds")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "directory for report.csv and trials.jsonl");
  run->add_option("--workdir-root", run_root, "parent directory for run workdirs");
  run->add_option("--success-mode", run_success, "success signal of the command")
      ->check(CLI::IsMember({"file", "exit"}));
  run->add_flag("--keep-workdirs", run_opt.keep_failed_workdirs,
                "keep workdirs of failed attempts");
  run->add_option("command", run_command, "program and arguments to supervise")
      ->required();
  run->positionals_at_end();
  run->callback([&] {
    run_opt.tick = std::chrono::duration<double>(run_tick);
    run_opt.success_mode =
        run_success == "exit" ? SuccessMode::ExitCode : SuccessMode::SentinelFile;
    run_opt.workdir_root = run_root;
    exit_code = cmd_run(run_command, build_spec(run_flags), run_opt,
                        run_out.empty() ? std::nullopt : std::optional<fs::path>(run_out));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // help exits 0; every usage problem exits 1
  } catch (const std::exception& e) {
    std::cerr << "catalyst: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
