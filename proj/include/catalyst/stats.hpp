#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "catalyst/types.hpp"

namespace catalyst {

// One trial's outcome as far as reporting cares: did it finish before the
// start cap, and if so, at what algorithm time (ticks).
struct TrialOutcome {
  bool success = false;
  double time = 0.0;  // meaningful only when success
};

// Descriptive statistics over success times only.
struct SuccessStats {
  double mean = 0.0;
  double median = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct Report {
  std::string label;
  std::uint64_t n = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  std::optional<SuccessStats> stats;  // absent when successes == 0
};

// Smallest sample value v with count(< v) <= alpha*n and
// count(> v) <= (1-alpha)*n on the empirical law. alpha = 1/2 gives the
// median, taking the lower middle value on even-sized samples.
double alpha_median(std::vector<double> samples, double alpha);

Report summarize(std::string label, const std::vector<TrialOutcome>& records);

// Header `simulation,n,succs,fails,mean,median,std_dev,min,max`; numeric
// fields rendered with two decimals, left empty when there are no successes.
void write_report_csv(std::ostream& os, const std::vector<Report>& rows);

}  // namespace catalyst
