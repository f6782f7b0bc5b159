#pragma once

#include <filesystem>
#include <istream>

#include "catalyst/distribution.hpp"

namespace catalyst {

// Distribution file: UTF-8 text, one atom per line as "<tick> <probability>",
// optional "inf <probability>" line, '#' starts a comment. Mass must sum to
// 1 within 1e-6 and is then normalized exactly.
// Throws std::invalid_argument (format) or std::runtime_error (unreadable).
RuntimeDistribution load_distribution_file(const std::filesystem::path& path);
RuntimeDistribution parse_distribution(std::istream& in, const std::string& origin = "<stream>");

// Sample file: CSV with header "runtime_ticks,censored", censored in {0,1}.
// Censored rows carry the cap in the runtime column.
SampleSet load_samples_csv(const std::filesystem::path& path);
SampleSet parse_samples_csv(std::istream& in, const std::string& origin = "<stream>");

}  // namespace catalyst
