#pragma once

// Run configuration files: `[section]` headers, `key = value` lines, `#` or
// `;` comments. See docs/config.md for the schema.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pidlab/evalkit.hpp"
#include "pidlab/plant.hpp"
#include "pidlab/search.hpp"
#include "pidlab/validator.hpp"

namespace pidlab {

struct SearchSettings {
  std::string algorithm = "routh";
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 0;
  BaselineOptions baseline{};
};

struct RunConfig {
  PlantModel plant{};
  Mission mission = Mission::make(MissionMode::Hold);
  ParamSpace space{};
  OracleConfig oracle{};
  SearchSettings search{};
  Coverage coverage{};
  std::optional<std::size_t> workers;
};

/// Throws ConfigError with `name:line:` anchored messages.
RunConfig parse_config(std::istream& in, const std::string& name = "config");
/// Throws IoError if the file cannot be read, ConfigError if it is malformed.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical `section.key = value` rendering of every effective setting.
std::string canonical_text(const RunConfig& cfg);
/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pidlab
