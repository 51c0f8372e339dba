#pragma once

#include <stdexcept>
#include <string>

#include "delaystab/distribution.hpp"

namespace delaystab {

// Raised for malformed distribution spec files; the CLI maps it to exit 64.
class SpecError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Parses a distribution spec from JSON or TOML text.
DelayDistribution parse_distribution_json(const std::string& text);
DelayDistribution parse_distribution_toml(const std::string& text);

// Reads a spec file, dispatching on the .json/.toml extension (falls back to
// content sniffing for other extensions).
DelayDistribution parse_distribution_file(const std::string& path);

// Canonical single-line JSON form of a distribution.
std::string emit_distribution_json(const DelayDistribution& dist);

}  // namespace delaystab
