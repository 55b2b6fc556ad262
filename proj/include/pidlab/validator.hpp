#pragma once

// Misbehavior oracle: simulate a configuration, check the mission spec.

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pidlab/mtl.hpp"
#include "pidlab/plant.hpp"

namespace pidlab {

enum class OracleKind { Offline, Online };

std::string_view to_string(OracleKind kind);
std::optional<OracleKind> parse_oracle_kind(std::string_view name);

struct OracleConfig {
  OracleKind kind = OracleKind::Offline;
  std::size_t window = 0;  // samples; used when kind == Online
  int repeats = 1;         // odd
  std::uint64_t base_seed = 0;
  // Mix the configuration into each run's noise seed, so neighbouring grid
  // points see independent noise. Off: run r uses base_seed + r for every config.
  bool per_config_noise = true;

  /// Throws ConfigError for even or non-positive repeats, or window < 2 when online.
  void check() const;
};

struct Verdict {
  bool valid = true;
  std::optional<std::string> violated_spec;  // set iff !valid
  int runs = 0;
  int votes_valid = 0;
};

/// Majority vote over per-run outcomes; an empty string marks a passing run,
/// anything else names the violated clause.
Verdict tally_votes(const std::vector<std::string>& outcomes);

/// Noise seed of run `run` for `pid`.
std::uint64_t run_seed(const OracleConfig& cfg, int run, const PidConfig& pid);

/// Total validate calls across every Validator in the process.
std::uint64_t global_query_count();

/// One query is one validate() call, however many simulations it runs.
class Validator {
 public:
  virtual ~Validator() = default;

  Verdict validate(const PidConfig& pid);
  /// Counts one query per element.
  std::vector<Verdict> validate_batch(std::span<const PidConfig> pids);

  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }

 protected:
  virtual Verdict do_validate(const PidConfig& pid) = 0;
  virtual std::vector<Verdict> do_validate_batch(std::span<const PidConfig> pids);

 private:
  void count(std::uint64_t n);

  std::atomic<std::uint64_t> queries_{0};
};

/// Simulates the plant through the mission and checks mode_spec (or a
/// supplied formula) with the configured oracle. Safe for concurrent use.
class SimulationValidator final : public Validator {
 public:
  SimulationValidator(PlantModel plant, Mission mission, OracleConfig cfg);
  SimulationValidator(PlantModel plant, Mission mission, OracleConfig cfg, mtl::Formula spec);

  const PlantModel& plant() const { return plant_; }
  const Mission& mission() const { return mission_; }
  const OracleConfig& config() const { return cfg_; }
  const mtl::Formula& spec() const { return spec_; }

 protected:
  Verdict do_validate(const PidConfig& pid) override;
  std::vector<Verdict> do_validate_batch(std::span<const PidConfig> pids) override;

 private:
  std::string check_run(const Trajectory& trace) const;

  PlantModel plant_;
  Mission mission_;
  OracleConfig cfg_;
  mtl::Formula spec_;
};

/// Wraps a predicate (true = valid). For tests and analytic oracles.
class FunctionValidator final : public Validator {
 public:
  explicit FunctionValidator(std::function<bool(const PidConfig&)> is_valid,
                             std::string spec_name = "predicate");

 protected:
  Verdict do_validate(const PidConfig& pid) override;

 private:
  std::function<bool(const PidConfig&)> is_valid_;
  std::string spec_name_;
};

/// One-shot convenience: SimulationValidator(plant, mission, cfg).validate(pid).
Verdict validate(const PidConfig& pid, const Mission& mission, const PlantModel& plant,
                 const OracleConfig& cfg);

}  // namespace pidlab
