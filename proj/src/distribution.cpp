#include "catalyst/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catalyst {

RuntimeDistribution RuntimeDistribution::from_atoms(
    std::vector<std::pair<Tick, double>> atoms, double infinite_mass) {
  if (!(infinite_mass >= 0.0 && infinite_mass <= 1.0))
    throw std::invalid_argument("infinite mass outside [0, 1]");
  std::sort(atoms.begin(), atoms.end());
  double total = infinite_mass;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    auto [tick, p] = atoms[i];
    if (tick == 0) throw std::invalid_argument("atom at tick 0 (ticks start at 1)");
    if (tick == never_tick) throw std::invalid_argument("use infinite_mass for the never-terminates atom");
    if (i > 0 && atoms[i - 1].first == tick) throw std::invalid_argument("duplicate atom tick");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("atom probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("distribution mass does not sum to 1");
  std::erase_if(atoms, [](const auto& a) { return a.second == 0.0; });
  if (atoms.empty() && infinite_mass < 1.0)
    throw std::invalid_argument("no finite atom and infinite mass < 1");

  RuntimeDistribution d;
  d.atoms_ = std::move(atoms);
  d.infinite_mass_ = infinite_mass;
  d.cum_.reserve(d.atoms_.size());
  double acc = 0.0;
  for (auto& [tick, p] : d.atoms_) {
    acc += p;
    d.cum_.push_back(acc);
  }
  return d;
}

double RuntimeDistribution::cdf(Tick t) const {
  // last atom with tick <= t
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                             [](Tick v, const auto& a) { return v < a.first; });
  if (it == atoms_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

Tick RuntimeDistribution::from_uniform(double u) const {
  auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) {
    // Beyond the finite mass: the infinite atom, or (when there is none)
    // the last finite atom absorbs the floating-point sliver above cum.back().
    if (infinite_mass_ > 0.0 || atoms_.empty()) return never_tick;
    return atoms_.back().first;
  }
  return atoms_[static_cast<std::size_t>(it - cum_.begin())].first;
}

RuntimeDistribution empirical_distribution(const SampleSet& samples) {
  if (samples.successes.empty())
    throw std::invalid_argument("no successful runs: empirical law undefined");
  const double total =
      static_cast<double>(samples.successes.size() + samples.n_censored);
  std::vector<std::pair<Tick, double>> atoms;
  {
    std::vector<Tick> sorted = samples.successes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      if (samples.censored_at && sorted[i] > *samples.censored_at)
        throw std::invalid_argument("success time exceeds the censoring cap");
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      atoms.emplace_back(sorted[i], static_cast<double>(j - i) / total);
      i = j;
    }
  }
  return RuntimeDistribution::from_atoms(std::move(atoms),
                                         static_cast<double>(samples.n_censored) / total);
}

}  // namespace catalyst
