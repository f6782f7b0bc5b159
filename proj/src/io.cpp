#include "catalyst/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace catalyst {

namespace {

[[noreturn]] void bad_line(const std::string& origin, std::size_t lineno, const std::string& why) {
  throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": " + why);
}

std::string strip(std::string s) {
  const auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Tick parse_tick(const std::string& tok, const std::string& origin, std::size_t lineno) {
  Tick v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    bad_line(origin, lineno, "expected a positive integer tick, got '" + tok + "'");
  return v;
}

double parse_prob(const std::string& tok, const std::string& origin, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    bad_line(origin, lineno, "expected a probability, got '" + tok + "'");
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

RuntimeDistribution parse_distribution(std::istream& in, const std::string& origin) {
  std::vector<std::pair<Tick, double>> atoms;
  double infinite_mass = 0.0;
  bool saw_inf = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip(line);
    if (body.empty()) continue;
    std::istringstream fields(body);
    std::string tick_tok, prob_tok, extra;
    fields >> tick_tok >> prob_tok;
    if (prob_tok.empty() || (fields >> extra))
      bad_line(origin, lineno, "expected '<tick> <probability>'");
    const double p = parse_prob(prob_tok, origin, lineno);
    if (!(p >= 0.0 && p <= 1.0)) bad_line(origin, lineno, "probability outside [0, 1]");
    if (tick_tok == "inf") {
      if (saw_inf) bad_line(origin, lineno, "duplicate inf line");
      saw_inf = true;
      infinite_mass = p;
    } else {
      const Tick t = parse_tick(tick_tok, origin, lineno);
      if (t == 0) bad_line(origin, lineno, "ticks start at 1");
      atoms.emplace_back(t, p);
    }
  }
  double total = infinite_mass;
  for (auto& [t, p] : atoms) total += p;
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument(origin + ": mass sums to " + std::to_string(total) +
                                ", expected 1 within 1e-6");
  // Normalize exactly so the constructor's tighter 1e-9 tolerance is met.
  for (auto& [t, p] : atoms) p /= total;
  infinite_mass /= total;
  return RuntimeDistribution::from_atoms(std::move(atoms), infinite_mass);
}

RuntimeDistribution load_distribution_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_distribution(in, path.string());
}

SampleSet parse_samples_csv(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw std::invalid_argument(origin + ": empty sample file");
  ++lineno;
  if (strip(line) != "runtime_ticks,censored")
    throw std::invalid_argument(origin + ": expected header 'runtime_ticks,censored'");
  SampleSet set;
  Tick max_censored = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    if (comma == std::string::npos) bad_line(origin, lineno, "expected '<ticks>,<0|1>'");
    const Tick t = parse_tick(body.substr(0, comma), origin, lineno);
    const std::string flag = body.substr(comma + 1);
    if (flag == "0") {
      set.successes.push_back(t);
    } else if (flag == "1") {
      ++set.n_censored;
      max_censored = std::max(max_censored, t);
    } else {
      bad_line(origin, lineno, "censored flag must be 0 or 1, got '" + flag + "'");
    }
  }
  if (set.n_censored > 0) set.censored_at = max_censored;
  if (set.censored_at)
    for (Tick s : set.successes)
      if (s > *set.censored_at)
        throw std::invalid_argument(origin + ": success time exceeds the censoring cap");
  return set;
}

SampleSet load_samples_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_samples_csv(in, path.string());
}

}  // namespace catalyst
