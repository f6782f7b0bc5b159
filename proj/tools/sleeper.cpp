// Test workload: draws a hidden runtime from a distribution file, busy-waits
// that many ticks, then reports success through the harness contract
// (touch $CATALYST_SUCCESS_FILE and exit 0). A draw of "inf" never finishes.
//
// Sleeping happens in tick/10 quanta and progress counts completed quanta
// only. A relative sleep keeps elapsing while the process group is stopped,
// so the quantum size bounds how much progress can leak into a suspension.

#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "catalyst/distribution.hpp"
#include "catalyst/io.hpp"
#include "catalyst/rng.hpp"
#include "catalyst/types.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sleeps a random number of ticks, then signals success"};
  std::string dist_path;
  std::uint64_t seed = 0;
  double tick_seconds = 1.0;
  app.add_option("--dist", dist_path, "runtime distribution file")->required();
  app.add_option("--seed", seed, "base seed, mixed with pid and clock");
  app.add_option("--tick", tick_seconds, "tick length in seconds")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const char* success_path = std::getenv("CATALYST_SUCCESS_FILE");
  if (success_path == nullptr || *success_path == '\0') {
    std::fprintf(stderr, "sleeper: CATALYST_SUCCESS_FILE is not set\n");
    return 1;
  }

  catalyst::Tick hidden = 0;
  try {
    const auto dist = catalyst::load_distribution_file(dist_path);
    // Every spawned attempt must draw an independent runtime even when the
    // harness passes one fixed seed, hence the pid/clock mixing.
    const auto now_ns = static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    const auto nonce = static_cast<std::uint64_t>(::getpid()) ^ (now_ns << 16);
    auto rng = catalyst::RngStream::derive(seed, nonce);
    hidden = dist.sample(rng);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sleeper: %s\n", e.what());
    return 1;
  }

  const auto quantum = std::chrono::duration<double>(tick_seconds / 10.0);
  if (hidden == catalyst::never_tick) {
    for (;;) std::this_thread::sleep_for(std::chrono::hours(24));
  }
  for (catalyst::Tick q = 0; q < hidden * 10; ++q) {
    std::this_thread::sleep_for(quantum);
  }

  std::ofstream out(success_path);
  out << "ok\n";
  out.close();
  return out ? 0 : 1;
}
