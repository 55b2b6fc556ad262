#include "pidlab/search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "pidlab/parallel.hpp"

namespace pidlab {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Grid values carry min + k * step rounding noise; 15 digits drop it.
std::string grid_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, ptr);
}

void check_axis(const GridAxis& a, const char* name) {
  const std::string n(name);
  if (!std::isfinite(a.min) || !std::isfinite(a.max) || !std::isfinite(a.step)) {
    throw ConfigError("space." + n + " must be finite");
  }
  if (!(a.min <= a.max)) throw ConfigError("space." + n + ": min must be <= max");
  if (!(a.step > 0.0)) throw ConfigError("space." + n + ": step must be > 0");
  // min == max pins the axis to one value (a single plane).
  if (a.min < a.max && a.step > a.max - a.min) {
    throw ConfigError("space." + n + ": step must be <= max - min");
  }
}

// Neighbours one step away along one axis, in a fixed order.
std::vector<GridIndex> neighbours(const ParamSpace& space, const GridIndex& g) {
  std::vector<GridIndex> out;
  const std::size_t n[3] = {space.n_p(), space.n_i(), space.n_d()};
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      GridIndex h = g;
      std::size_t& k = axis == 0 ? h.p : axis == 1 ? h.i : h.d;
      if (sign < 0 && k == 0) continue;
      if (sign > 0 && k + 1 >= n[axis]) continue;
      k = sign < 0 ? k - 1 : k + 1;
      out.push_back(h);
    }
  }
  return out;
}

// Draws unvisited grid points uniformly without replacement.
class Sampler {
 public:
  Sampler(const ParamSpace& space, std::mt19937_64& rng) : space_(space), order_(space.total()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng);
  }

  std::optional<GridIndex> next_unvisited(const std::unordered_set<std::size_t>& visited) {
    while (cursor_ < order_.size()) {
      const std::size_t k = order_[cursor_++];
      if (!visited.contains(k)) return space_.unlinear(k);
    }
    return std::nullopt;
  }

 private:
  const ParamSpace& space_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Probes a configuration, tracking budget, visits and invalid hits.
class Prober {
 public:
  Prober(const ParamSpace& space, Validator& validator, std::uint64_t budget)
      : space_(space), validator_(validator), budget_(budget) {}

  bool exhausted() const { return used_ >= budget_ || visited_.size() >= space_.total(); }
  bool visited(const GridIndex& g) const { return visited_.contains(space_.linear(g)); }
  const std::unordered_set<std::size_t>& visited_set() const { return visited_; }

  bool probe(const GridIndex& g) {
    ++used_;
    visited_.insert(space_.linear(g));
    const bool valid = validator_.validate(space_.at(g)).valid;
    if (!valid) invalid_.insert(g);
    return valid;
  }

  SearchResult result() const { return {{invalid_.begin(), invalid_.end()}, used_}; }

 private:
  const ParamSpace& space_;
  Validator& validator_;
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
  std::unordered_set<std::size_t> visited_;
  std::set<GridIndex> invalid_;
};

void search_plane(const ParamSpace& space, std::size_t p, Validator& validator, bool downward,
                  std::vector<BoundaryEntry>& out) {
  const std::size_t top = space.n_i() - 1;
  std::size_t i = top;
  for (std::size_t d = 0; d < space.n_d(); ++d) {
    const bool valid = validator.validate(space.at({p, i, d})).valid;
    ColumnResult r;
    if (valid) {
      r = search_column(space, p, i, d, Direction::Up, validator, true);
    } else if (downward || d == 0) {
      // The first column has nothing carried in, so even the ablation descends there.
      r = search_column(space, p, i, d, Direction::Down, validator, false);
    } else {
      r = i == 0 ? ColumnResult{ColumnStatus::AllInvalid, 0}
                 : ColumnResult{ColumnStatus::Boundary, i};
    }
    out.push_back({p, d, r});
    switch (r.status) {
      case ColumnStatus::Boundary: i = r.i_save; break;
      case ColumnStatus::AllValid: i = top; break;
      case ColumnStatus::AllInvalid: i = 0; break;
    }
  }
}

}  // namespace

std::size_t GridAxis::size() const {
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

double GridAxis::value(std::size_t k) const { return min + static_cast<double>(k) * step; }

void ParamSpace::check() const {
  check_axis(p, "p");
  check_axis(i, "i");
  check_axis(d, "d");
}

GridIndex ParamSpace::unlinear(std::size_t k) const {
  GridIndex g;
  g.i = k % n_i();
  k /= n_i();
  g.d = k % n_d();
  g.p = k / n_d();
  return g;
}

std::string_view to_string(ColumnStatus s) {
  switch (s) {
    case ColumnStatus::Boundary: return "boundary";
    case ColumnStatus::AllValid: return "all_valid";
    case ColumnStatus::AllInvalid: return "all_invalid";
  }
  return "?";
}

std::optional<ColumnStatus> parse_column_status(std::string_view s) {
  for (auto c : {ColumnStatus::Boundary, ColumnStatus::AllValid, ColumnStatus::AllInvalid}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

const BoundaryEntry* BoundaryLine::find(std::size_t p, std::size_t d) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{p, d},
                             [](const BoundaryEntry& e, const std::pair<std::size_t, std::size_t>& k) {
                               return std::pair{e.p, e.d} < k;
                             });
  if (it == entries.end() || it->p != p || it->d != d) return nullptr;
  return &*it;
}

bool BoundaryLine::complete() const {
  if (entries.size() != space.n_p() * space.n_d()) return false;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].p != k / space.n_d() || entries[k].d != k % space.n_d()) return false;
  }
  return true;
}

ColumnResult search_column(const ParamSpace& space, std::size_t p, std::size_t i_start,
                           std::size_t d, Direction direction, Validator& validator,
                           std::optional<bool> start_valid) {
  const auto valid_at = [&](std::size_t i) { return validator.validate(space.at({p, i, d})).valid; };
  const bool start = start_valid ? *start_valid : valid_at(i_start);

  if (direction == Direction::Up && start) {
    for (std::size_t i = i_start; i + 1 < space.n_i(); ++i) {
      if (!valid_at(i + 1)) return {ColumnStatus::Boundary, i};
    }
    return {ColumnStatus::AllValid, 0};
  }

  if (start) return {ColumnStatus::Boundary, i_start};
  for (std::size_t i = i_start; i-- > 0;) {
    if (valid_at(i)) return {ColumnStatus::Boundary, i};
  }
  return {ColumnStatus::AllInvalid, 0};
}

BoundaryLine identify_boundary(const ParamSpace& space, Validator& validator,
                               const SearchOptions& options) {
  space.check();
  const std::uint64_t before = validator.queries();
  std::vector<std::vector<BoundaryEntry>> planes(space.n_p());
  parallel_chunks(space.n_p(), 1, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      search_plane(space, p, validator, options.downward_search, planes[p]);
    }
  });
  BoundaryLine bl;
  bl.space = space;
  for (auto& plane : planes) bl.entries.insert(bl.entries.end(), plane.begin(), plane.end());
  bl.queries = validator.queries() - before;
  return bl;
}

BoundaryLine identify_boundary_dsoff(const ParamSpace& space, Validator& validator,
                                     std::size_t workers) {
  return identify_boundary(space, validator, {false, workers});
}

SearchResult random_fuzz(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                         std::uint64_t seed) {
  space.check();
  std::mt19937_64 rng(seed);
  Sampler sampler(space, rng);
  Prober prober(space, validator, budget);
  std::optional<GridIndex> pursuit;
  while (!prober.exhausted()) {
    std::optional<GridIndex> g;
    if (pursuit) {
      std::vector<GridIndex> open;
      for (const GridIndex& h : neighbours(space, *pursuit)) {
        if (!prober.visited(h)) open.push_back(h);
      }
      if (!open.empty()) {
        g = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
      }
    }
    if (!g) g = sampler.next_unvisited(prober.visited_set());
    if (!g) break;
    pursuit = prober.probe(*g) ? std::nullopt : g;
  }
  return prober.result();
}

SearchResult hill_climb(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                        std::uint64_t seed) {
  space.check();
  std::mt19937_64 rng(seed);
  Sampler sampler(space, rng);
  Prober prober(space, validator, budget);
  while (!prober.exhausted()) {
    auto current = sampler.next_unvisited(prober.visited_set());
    if (!current) break;
    prober.probe(*current);
    // Greedy ascent on binary feedback: step to any invalid neighbour.
    bool moved = true;
    while (moved && !prober.exhausted()) {
      moved = false;
      auto around = neighbours(space, *current);
      std::shuffle(around.begin(), around.end(), rng);
      for (const GridIndex& h : around) {
        if (prober.exhausted()) break;
        if (prober.visited(h)) continue;
        if (!prober.probe(h)) {
          current = h;
          moved = true;
          break;
        }
      }
    }
  }
  return prober.result();
}

SearchResult genetic_search(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                            std::uint64_t seed, const BaselineOptions& options) {
  space.check();
  if (options.population < 2) throw ConfigError("search.population must be >= 2");
  if (!(options.mutation >= 0.0 && options.mutation <= 1.0)) {
    throw ConfigError("search.mutation must be in [0, 1]");
  }
  if (options.tournament < 1) throw ConfigError("search.tournament must be >= 1");

  std::mt19937_64 rng(seed);
  Sampler sampler(space, rng);
  std::set<GridIndex> invalid;
  std::uint64_t used = 0;

  struct Member {
    GridIndex g;
    int fitness;
  };
  std::vector<Member> population;
  const std::unordered_set<std::size_t> none;
  const std::size_t pop = std::min(options.population, space.total());
  for (std::size_t k = 0; k < pop; ++k) population.push_back({*sampler.next_unvisited(none), 0});

  const auto evaluate = [&](Member& m) {
    ++used;
    const bool valid = validator.validate(space.at(m.g)).valid;
    m.fitness = valid ? 0 : 1;
    if (!valid) invalid.insert(m.g);
  };
  for (Member& m : population) {
    if (used >= budget) break;
    evaluate(m);
  }

  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto select = [&]() -> const Member& {
    const Member* best = &population[pick(rng)];
    for (std::size_t k = 1; k < options.tournament; ++k) {
      const Member& m = population[pick(rng)];
      if (m.fitness > best->fitness) best = &m;
    }
    return *best;
  };
  const std::size_t n[3] = {space.n_p(), space.n_i(), space.n_d()};
  const auto mutate = [&](std::size_t& k, std::size_t size) {
    if (size < 2 || coin(rng) >= options.mutation) return;
    const bool up = k == 0 || (k + 1 < size && coin(rng) < 0.5);
    k = up ? k + 1 : k - 1;
  };

  while (used < budget) {
    std::vector<Member> next;
    next.reserve(population.size());
    while (next.size() < population.size() && used < budget) {
      const Member& a = select();
      const Member& b = select();
      std::size_t genes_a[3] = {a.g.p, a.g.i, a.g.d};
      const std::size_t genes_b[3] = {b.g.p, b.g.i, b.g.d};
      const std::size_t cut = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
      for (std::size_t k = cut; k < 3; ++k) genes_a[k] = genes_b[k];
      for (std::size_t k = 0; k < 3; ++k) mutate(genes_a[k], n[k]);
      Member child{{genes_a[0], genes_a[1], genes_a[2]}, 0};
      evaluate(child);
      next.push_back(child);
    }
    if (next.size() == population.size()) population = std::move(next);
  }
  return {{invalid.begin(), invalid.end()}, used};
}

std::string space_preamble(const ParamSpace& s) {
  std::string out = "# space";
  for (const auto& [name, a] : {std::pair{"p", s.p}, std::pair{"i", s.i}, std::pair{"d", s.d}}) {
    out += ' ';
    out += name;
    out += ' ' + shortest(a.min) + ' ' + shortest(a.max) + ' ' + shortest(a.step);
  }
  return out;
}

std::optional<ParamSpace> parse_space_preamble(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string hash, word;
  if (!(in >> hash >> word) || hash != "#" || word != "space") return std::nullopt;
  ParamSpace s;
  for (auto [name, axis] : {std::pair{"p", &s.p}, std::pair{"i", &s.i}, std::pair{"d", &s.d}}) {
    std::string label, lo, hi, step;
    if (!(in >> label >> lo >> hi >> step) || label != name) return std::nullopt;
    for (auto [text, target] : {std::pair{&lo, &axis->min}, std::pair{&hi, &axis->max},
                                std::pair{&step, &axis->step}}) {
      auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), *target);
      if (ec != std::errc() || ptr != text->data() + text->size()) return std::nullopt;
    }
  }
  return s;
}

std::optional<std::size_t> axis_index(const GridAxis& axis, double value) {
  const double k = (value - axis.min) / axis.step;
  const double r = std::round(k);
  if (!(std::abs(k - r) <= 1e-6) || r < 0.0 || r >= static_cast<double>(axis.size())) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(r);
}

void write_boundary_csv(std::ostream& out, const BoundaryLine& bl) {
  out << space_preamble(bl.space) << '\n';
  out << "p,d,status,i_save\n";
  for (const BoundaryEntry& e : bl.entries) {
    out << grid_value(bl.space.p.value(e.p)) << ',' << grid_value(bl.space.d.value(e.d)) << ','
        << to_string(e.result.status) << ',';
    if (e.result.status == ColumnStatus::Boundary) out << grid_value(bl.space.i.value(e.result.i_save));
    out << '\n';
  }
}

BoundaryLine read_boundary_csv(std::istream& in) {
  BoundaryLine bl;
  std::string line;
  std::size_t lineno = 0;
  bool have_space = false, have_header = false;
  const auto fail = [&](const std::string& why) {
    throw ConfigError("boundary CSV line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto s = parse_space_preamble(line)) {
        s->check();
        bl.space = *s;
        have_space = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "p,d,status,i_save") fail("expected header p,d,status,i_save");
      if (!have_space) fail("missing '# space' preamble before the header");
      have_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string f;
    while (std::getline(row, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) fail("expected 4 fields");
    const auto number = [&](const std::string& text) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) fail("bad number '" + text + "'");
      return v;
    };
    const auto on_axis = [&](const GridAxis& a, const std::string& text, const char* name) {
      auto k = axis_index(a, number(text));
      if (!k) fail(std::string(name) + " value " + text + " is not on the grid");
      return *k;
    };
    BoundaryEntry e;
    e.p = on_axis(bl.space.p, fields[0], "p");
    e.d = on_axis(bl.space.d, fields[1], "d");
    auto status = parse_column_status(fields[2]);
    if (!status) fail("unknown status '" + fields[2] + "'");
    e.result.status = *status;
    if (*status == ColumnStatus::Boundary) {
      e.result.i_save = on_axis(bl.space.i, fields[3], "i_save");
    } else if (!fields[3].empty()) {
      fail("i_save must be empty for status " + fields[2]);
    }
    bl.entries.push_back(e);
  }
  if (!have_header) throw ConfigError("boundary CSV: missing header");
  std::sort(bl.entries.begin(), bl.entries.end(), [](const BoundaryEntry& a, const BoundaryEntry& b) {
    return std::pair{a.p, a.d} < std::pair{b.p, b.d};
  });
  for (std::size_t k = 1; k < bl.entries.size(); ++k) {
    if (bl.entries[k].p == bl.entries[k - 1].p && bl.entries[k].d == bl.entries[k - 1].d) {
      throw ConfigError("boundary CSV: duplicate column");
    }
  }
  return bl;
}

}  // namespace pidlab
