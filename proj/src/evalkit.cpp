#include "pidlab/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pidlab/parallel.hpp"

namespace pidlab {

namespace {

// 15 digits: drops the min + k * step rounding noise of grid values.
std::string grid_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, ptr);
}

std::string coverage_preamble(const Coverage& c) {
  return "# coverage " + std::to_string(c.p) + ' ' + std::to_string(c.i) + ' ' +
         std::to_string(c.d);
}

std::optional<Coverage> parse_coverage_preamble(const std::string& line) {
  std::istringstream in(line);
  std::string hash, word;
  Coverage c;
  if (!(in >> hash >> word >> c.p >> c.i >> c.d) || hash != "#" || word != "coverage") {
    return std::nullopt;
  }
  if (c.p == 0 || c.i == 0 || c.d == 0) return std::nullopt;
  return c;
}

constexpr std::size_t kChunk = 32;

}  // namespace

ClassifiedGrid::ClassifiedGrid(ParamSpace space, Coverage coverage)
    : space_(space), coverage_(coverage), labels_(space.total(), Label::Uncovered) {
  if (coverage.p == 0 || coverage.i == 0 || coverage.d == 0) {
    throw ConfigError("coverage strides must be >= 1");
  }
}

bool ClassifiedGrid::covers(const GridIndex& g) const {
  return space_.contains(g) && g.p % coverage_.p == 0 && g.i % coverage_.i == 0 &&
         g.d % coverage_.d == 0;
}

std::vector<GridIndex> ClassifiedGrid::covered_points() const {
  std::vector<GridIndex> out;
  for (std::size_t p = 0; p < space_.n_p(); p += coverage_.p) {
    for (std::size_t d = 0; d < space_.n_d(); d += coverage_.d) {
      for (std::size_t i = 0; i < space_.n_i(); i += coverage_.i) out.push_back({p, i, d});
    }
  }
  return out;
}

std::size_t ClassifiedGrid::covered_count() const {
  const auto ceil_div = [](std::size_t n, std::size_t s) { return (n + s - 1) / s; };
  return ceil_div(space_.n_p(), coverage_.p) * ceil_div(space_.n_i(), coverage_.i) *
         ceil_div(space_.n_d(), coverage_.d);
}

void ClassifiedGrid::set(const GridIndex& g, bool valid) {
  if (!covers(g)) throw std::invalid_argument("ClassifiedGrid::set: point outside coverage");
  labels_[space_.linear(g)] = valid ? Label::Valid : Label::Invalid;
}

std::vector<GridIndex> ClassifiedGrid::invalid_points() const {
  std::vector<GridIndex> out;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (labels_[k] == Label::Invalid) out.push_back(space_.unlinear(k));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ClassifiedGrid::complete() const {
  for (const GridIndex& g : covered_points()) {
    if (label(g) == Label::Uncovered) return false;
  }
  return true;
}

ClassifiedGrid ground_truth(const ParamSpace& space, Validator& validator,
                            const Coverage& coverage, std::size_t workers) {
  space.check();
  ClassifiedGrid grid(space, coverage);
  const auto points = grid.covered_points();
  std::vector<PidConfig> pids;
  pids.reserve(points.size());
  for (const GridIndex& g : points) pids.push_back(space.at(g));
  std::vector<std::uint8_t> valid(points.size());
  parallel_chunks(points.size(), kChunk, workers, [&](std::size_t begin, std::size_t end) {
    const auto verdicts = validator.validate_batch(std::span(pids).subspan(begin, end - begin));
    for (std::size_t k = begin; k < end; ++k) valid[k] = verdicts[k - begin].valid;
  });
  for (std::size_t k = 0; k < points.size(); ++k) grid.set(points[k], valid[k] != 0);
  return grid;
}

std::vector<GridIndex> region_from_boundary(const BoundaryLine& bl) {
  if (!bl.complete()) throw ConfigError("boundary line does not cover every (p, d) column");
  std::vector<GridIndex> out;
  for (const BoundaryEntry& e : bl.entries) {
    std::size_t from = 0;
    switch (e.result.status) {
      case ColumnStatus::AllValid: continue;
      case ColumnStatus::AllInvalid: from = 0; break;
      case ColumnStatus::Boundary: from = e.result.i_save + 1; break;
    }
    for (std::size_t i = from; i < bl.space.n_i(); ++i) out.push_back({e.p, i, e.d});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Metrics evaluate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs) {
  Metrics m;
  for (const GridIndex& g : gt.covered_points()) {
    if (gt.label(g) == Label::Invalid) ++m.gt_size;
  }
  std::vector<GridIndex> seen;
  for (const GridIndex& g : rs) {
    if (!gt.covers(g)) continue;
    seen.push_back(g);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  m.rs_size = seen.size();
  for (const GridIndex& g : seen) {
    if (gt.label(g) == Label::Invalid) ++m.intersection;
  }
  if (m.gt_size == 0) {
    m.mr = 0.0;
    m.flags.push_back("empty_gt");
  } else {
    m.mr = static_cast<double>(m.gt_size - m.intersection) / static_cast<double>(m.gt_size);
  }
  if (m.rs_size == 0) {
    m.hr = 1.0;
    m.flags.push_back("empty_rs");
  } else {
    m.hr = static_cast<double>(m.intersection) / static_cast<double>(m.rs_size);
  }
  return m;
}

double miss_rate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs) {
  return evaluate(gt, rs).mr;
}

double hit_rate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs) {
  return evaluate(gt, rs).hr;
}

OracleComparison compare_oracles(const std::vector<PidConfig>& configs, const Mission& mission,
                                 const PlantModel& plant, std::size_t window,
                                 std::uint64_t base_seed, std::size_t workers) {
  if (window < 2) throw ConfigError("oracle window must be >= 2 samples");
  OracleConfig offline_cfg;
  offline_cfg.base_seed = base_seed;
  OracleConfig online_cfg = offline_cfg;
  online_cfg.kind = OracleKind::Online;
  online_cfg.window = window;

  Mission long_mission = mission;
  long_mission.duration = 10.0 * mission.duration;
  PlantModel long_plant = plant;
  long_plant.t_max = 10.0 * plant.t_max;

  SimulationValidator offline(plant, mission, offline_cfg);
  SimulationValidator online(plant, mission, online_cfg);
  SimulationValidator reference(long_plant, long_mission, offline_cfg);

  OracleComparison out;
  out.rows.resize(configs.size());
  parallel_chunks(configs.size(), kChunk, workers, [&](std::size_t begin, std::size_t end) {
    const auto chunk = std::span(configs).subspan(begin, end - begin);
    const auto a = offline.validate_batch(chunk);
    const auto b = online.validate_batch(chunk);
    const auto c = reference.validate_batch(chunk);
    for (std::size_t k = begin; k < end; ++k) {
      out.rows[k] = {configs[k], a[k - begin].valid, b[k - begin].valid, c[k - begin].valid};
    }
  });
  if (!configs.empty()) {
    std::size_t off = 0, on = 0;
    for (const auto& row : out.rows) {
      off += row.offline == row.reference;
      on += row.online == row.reference;
    }
    out.offline_agreement = static_cast<double>(off) / static_cast<double>(configs.size());
    out.online_agreement = static_cast<double>(on) / static_cast<double>(configs.size());
  }
  return out;
}

void write_grid_csv(std::ostream& out, const ClassifiedGrid& grid) {
  out << space_preamble(grid.space()) << '\n' << coverage_preamble(grid.coverage()) << '\n';
  out << "kp,ki,kd,label\n";
  for (const GridIndex& g : grid.covered_points()) {
    const Label l = grid.label(g);
    if (l == Label::Uncovered) continue;
    const PidConfig c = grid.space().at(g);
    out << grid_value(c.kp) << ',' << grid_value(c.ki) << ',' << grid_value(c.kd) << ','
        << (l == Label::Valid ? "valid" : "invalid") << '\n';
  }
}

void write_invalid_set_csv(std::ostream& out, const ParamSpace& space,
                           const std::vector<GridIndex>& invalid) {
  out << space_preamble(space) << '\n' << coverage_preamble({}) << '\n';
  out << "kp,ki,kd,label\n";
  for (const GridIndex& g : invalid) {
    const PidConfig c = space.at(g);
    out << grid_value(c.kp) << ',' << grid_value(c.ki) << ',' << grid_value(c.kd) << ",invalid\n";
  }
}

ClassifiedGrid read_grid_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<ParamSpace> space;
  Coverage coverage;
  ClassifiedGrid grid;
  bool have_header = false;
  const auto fail = [&](const std::string& why) {
    throw ConfigError("grid CSV line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto s = parse_space_preamble(line)) {
        s->check();
        space = s;
      } else if (auto c = parse_coverage_preamble(line)) {
        coverage = *c;
      }
      continue;
    }
    if (!have_header) {
      if (line != "kp,ki,kd,label") fail("expected header kp,ki,kd,label");
      if (!space) fail("missing '# space' preamble before the header");
      grid = ClassifiedGrid(*space, coverage);
      have_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string f[4];
    for (auto& field : f) {
      if (!std::getline(row, field, ',')) fail("expected 4 fields");
    }
    GridIndex g;
    std::size_t* targets[3] = {&g.p, &g.i, &g.d};
    const GridAxis* axes[3] = {&space->p, &space->i, &space->d};
    for (int k = 0; k < 3; ++k) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
      if (ec != std::errc() || ptr != f[k].data() + f[k].size()) fail("bad number '" + f[k] + "'");
      auto idx = axis_index(*axes[k], v);
      if (!idx) fail("value " + f[k] + " is not on the grid");
      *targets[k] = *idx;
    }
    if (f[3] != "valid" && f[3] != "invalid") fail("label must be valid or invalid");
    if (!grid.covers(g)) fail("point outside the declared coverage");
    grid.set(g, f[3] == "valid");
  }
  if (!have_header) throw ConfigError("grid CSV: missing header");
  return grid;
}

}  // namespace pidlab
