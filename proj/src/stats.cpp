#include "catalyst/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace catalyst {

namespace {

// Slack for comparing integer counts against alpha*n, which may land just
// below an integer in floating point.
constexpr double count_eps = 1e-9;

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

double alpha_median(std::vector<double> samples, double alpha) {
  if (samples.empty()) throw std::domain_error("alpha_median: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha_median: alpha must lie in (0,1)");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double below = static_cast<double>(i);
    const double above = static_cast<double>(samples.size() - j);
    if (below <= alpha * n + count_eps && above <= (1.0 - alpha) * n + count_eps)
      return samples[i];
    i = j;
  }
  // Unreachable: the last distinct value always satisfies the upper condition
  // and some prefix value the lower one.
  throw std::logic_error("alpha_median: no order statistic qualified");
}

Report summarize(std::string label, const std::vector<TrialOutcome>& records) {
  Report rep;
  rep.label = std::move(label);
  rep.n = records.size();
  std::vector<double> times;
  for (const auto& r : records) {
    if (r.success)
      times.push_back(r.time);
    else
      ++rep.failures;
  }
  rep.successes = times.size();
  if (times.empty()) return rep;

  SuccessStats s;
  double sum = 0.0;
  s.min = times.front();
  s.max = times.front();
  for (double t : times) {
    sum += t;
    s.min = std::min(s.min, t);
    s.max = std::max(s.max, t);
  }
  s.mean = sum / static_cast<double>(times.size());
  s.median = alpha_median(times, 0.5);
  if (times.size() > 1) {
    double ss = 0.0;
    for (double t : times) ss += (t - s.mean) * (t - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(times.size() - 1));
  }
  rep.stats = s;
  return rep;
}

void write_report_csv(std::ostream& os, const std::vector<Report>& rows) {
  os << "simulation,n,succs,fails,mean,median,std_dev,min,max\n";
  for (const auto& r : rows) {
    os << r.label << ',' << r.n << ',' << r.successes << ',' << r.failures << ',';
    if (r.stats) {
      os << two_decimals(r.stats->mean) << ',' << two_decimals(r.stats->median) << ','
         << two_decimals(r.stats->std_dev) << ',' << two_decimals(r.stats->min) << ','
         << two_decimals(r.stats->max);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

}  // namespace catalyst
