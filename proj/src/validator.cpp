#include "pidlab/validator.hpp"

#include <algorithm>
#include <bit>

namespace pidlab {

namespace {

std::atomic<std::uint64_t> g_queries{0};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Verdict tally_votes(const std::vector<std::string>& outcomes) {
  Verdict v;
  v.runs = static_cast<int>(outcomes.size());
  for (const std::string& o : outcomes) {
    if (o.empty()) ++v.votes_valid;
  }
  v.valid = 2 * v.votes_valid > v.runs;
  if (!v.valid) {
    auto failed = std::find_if(outcomes.begin(), outcomes.end(),
                               [](const std::string& o) { return !o.empty(); });
    v.violated_spec = *failed;
  }
  return v;
}

namespace {

constexpr std::size_t kLanes = 32;

}  // namespace

std::string_view to_string(OracleKind kind) {
  return kind == OracleKind::Offline ? "offline" : "online";
}

std::optional<OracleKind> parse_oracle_kind(std::string_view name) {
  if (name == "offline") return OracleKind::Offline;
  if (name == "online") return OracleKind::Online;
  return std::nullopt;
}

void OracleConfig::check() const {
  if (repeats < 1 || repeats % 2 == 0) throw ConfigError("oracle.repeats must be odd and >= 1");
  if (kind == OracleKind::Online && window < 2) {
    throw ConfigError("oracle.window must be >= 2 samples for the online oracle");
  }
}

std::uint64_t run_seed(const OracleConfig& cfg, int run, const PidConfig& pid) {
  const std::uint64_t base = cfg.base_seed + static_cast<std::uint64_t>(run);
  if (!cfg.per_config_noise) return base;
  std::uint64_t h = splitmix64(base);
  for (double g : {pid.kp, pid.ki, pid.kd}) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(g));
  return h;
}

std::uint64_t global_query_count() { return g_queries.load(std::memory_order_relaxed); }

void Validator::count(std::uint64_t n) {
  queries_.fetch_add(n, std::memory_order_relaxed);
  g_queries.fetch_add(n, std::memory_order_relaxed);
}

Verdict Validator::validate(const PidConfig& pid) {
  count(1);
  return do_validate(pid);
}

std::vector<Verdict> Validator::validate_batch(std::span<const PidConfig> pids) {
  count(pids.size());
  return do_validate_batch(pids);
}

std::vector<Verdict> Validator::do_validate_batch(std::span<const PidConfig> pids) {
  std::vector<Verdict> out;
  out.reserve(pids.size());
  for (const PidConfig& pid : pids) out.push_back(do_validate(pid));
  return out;
}

SimulationValidator::SimulationValidator(PlantModel plant, Mission mission, OracleConfig cfg)
    : SimulationValidator(plant, mission, cfg, mtl::mode_spec(mission)) {}

SimulationValidator::SimulationValidator(PlantModel plant, Mission mission, OracleConfig cfg,
                                         mtl::Formula spec)
    : plant_(std::move(plant)), mission_(std::move(mission)), cfg_(cfg), spec_(std::move(spec)) {
  plant_.check();
  mission_.check();
  cfg_.check();
}

std::string SimulationValidator::check_run(const Trajectory& trace) const {
  const std::size_t window = cfg_.kind == OracleKind::Online ? cfg_.window : 0;
  return mtl::first_violation(spec_, trace, window);
}

Verdict SimulationValidator::do_validate(const PidConfig& pid) {
  return do_validate_batch(std::span(&pid, 1)).front();
}

std::vector<Verdict> SimulationValidator::do_validate_batch(std::span<const PidConfig> pids) {
  std::vector<std::vector<std::string>> outcomes(pids.size());
  std::vector<std::uint64_t> seeds;
  for (std::size_t begin = 0; begin < pids.size(); begin += kLanes) {
    const auto chunk = pids.subspan(begin, std::min(kLanes, pids.size() - begin));
    for (int r = 0; r < cfg_.repeats; ++r) {
      seeds.clear();
      for (const PidConfig& pid : chunk) seeds.push_back(run_seed(cfg_, r, pid));
      const auto traces = simulate_batch(plant_, mission_, chunk, seeds);
      for (std::size_t j = 0; j < chunk.size(); ++j) {
        outcomes[begin + j].push_back(check_run(traces[j]));
      }
    }
  }
  std::vector<Verdict> out;
  out.reserve(pids.size());
  for (auto& o : outcomes) out.push_back(tally_votes(o));
  return out;
}

FunctionValidator::FunctionValidator(std::function<bool(const PidConfig&)> is_valid,
                                     std::string spec_name)
    : is_valid_(std::move(is_valid)), spec_name_(std::move(spec_name)) {}

Verdict FunctionValidator::do_validate(const PidConfig& pid) {
  Verdict v;
  v.runs = 1;
  v.valid = is_valid_(pid);
  v.votes_valid = v.valid ? 1 : 0;
  if (!v.valid) v.violated_spec = spec_name_;
  return v;
}

Verdict validate(const PidConfig& pid, const Mission& mission, const PlantModel& plant,
                 const OracleConfig& cfg) {
  return SimulationValidator(plant, mission, cfg).validate(pid);
}

}  // namespace pidlab
