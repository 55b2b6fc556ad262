#pragma once

// Grid parameter space, per-plane boundary tracing and baseline searchers.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "pidlab/plant.hpp"
#include "pidlab/validator.hpp"

namespace pidlab {

/// Grid values min + k * step for k in [0, size()).
struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;

  std::size_t size() const;
  double value(std::size_t k) const;
  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

struct GridIndex {
  std::size_t p = 0;
  std::size_t i = 0;
  std::size_t d = 0;

  friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

struct ParamSpace {
  GridAxis p;
  GridAxis i;
  GridAxis d;

  /// Throws ConfigError unless, per axis, step > 0 and either min == max (one
  /// value) or min < max with step <= max - min.
  void check() const;

  std::size_t n_p() const { return p.size(); }
  std::size_t n_i() const { return i.size(); }
  std::size_t n_d() const { return d.size(); }
  std::size_t total() const { return n_p() * n_i() * n_d(); }

  PidConfig at(const GridIndex& g) const { return {p.value(g.p), i.value(g.i), d.value(g.d)}; }
  bool contains(const GridIndex& g) const { return g.p < n_p() && g.i < n_i() && g.d < n_d(); }
  /// Row-major over (p, d, i).
  std::size_t linear(const GridIndex& g) const { return (g.p * n_d() + g.d) * n_i() + g.i; }
  GridIndex unlinear(std::size_t k) const;

  friend bool operator==(const ParamSpace&, const ParamSpace&) = default;
};

enum class ColumnStatus { Boundary, AllValid, AllInvalid };

std::string_view to_string(ColumnStatus s);
std::optional<ColumnStatus> parse_column_status(std::string_view s);

struct ColumnResult {
  ColumnStatus status = ColumnStatus::AllInvalid;
  std::size_t i_save = 0;  // meaningful for Boundary only

  friend bool operator==(const ColumnResult&, const ColumnResult&) = default;
};

struct BoundaryEntry {
  std::size_t p = 0;
  std::size_t d = 0;
  ColumnResult result;
};

struct BoundaryLine {
  ParamSpace space;
  std::vector<BoundaryEntry> entries;  // sorted by (p, d), one per column
  std::uint64_t queries = 0;

  const BoundaryEntry* find(std::size_t p, std::size_t d) const;
  /// True when every (p, d) column has exactly one entry.
  bool complete() const;
};

enum class Direction { Up, Down };

/// Walks column (p, d) from i_start. Down: the first valid i at or below
/// i_start, AllInvalid if none. Up: the last valid i before the first invalid
/// one above i_start, AllValid if the top is reached. An Up walk whose start
/// is invalid continues as a Down walk. `start_valid` supplies an already
/// known verdict at i_start so it is not queried again.
ColumnResult search_column(const ParamSpace& space, std::size_t p, std::size_t i_start,
                           std::size_t d, Direction direction, Validator& validator,
                           std::optional<bool> start_valid = std::nullopt);

struct SearchOptions {
  bool downward_search = true;  // false: the DSOff ablation
  std::size_t workers = 1;      // p-planes searched concurrently
};

/// Column walk per p-plane from the top-left corner, carrying i between columns.
BoundaryLine identify_boundary(const ParamSpace& space, Validator& validator,
                               const SearchOptions& options = {});
BoundaryLine identify_boundary_dsoff(const ParamSpace& space, Validator& validator,
                                     std::size_t workers = 1);

/// Invalid configurations found by a baseline, sorted, without duplicates.
struct SearchResult {
  std::vector<GridIndex> invalid;
  std::uint64_t queries = 0;
};

struct BaselineOptions {
  std::size_t population = 20;  // genetic
  double mutation = 0.1;        // genetic, per gene
  std::size_t tournament = 2;   // genetic
};

/// Uniform sampling without replacement; after an invalid hit the next probe
/// is an unvisited +-1 step neighbour. Stops at `budget` or when the grid is exhausted.
SearchResult random_fuzz(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                         std::uint64_t seed);
/// Random restarts; from each start, moves to the first invalid unvisited neighbour.
SearchResult hill_climb(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                        std::uint64_t seed);
/// Fitness 1 for invalid; tournament selection, one-point crossover on (p, i, d),
/// +-1 step mutation. Every evaluation is a query.
SearchResult genetic_search(const ParamSpace& space, Validator& validator, std::uint64_t budget,
                            std::uint64_t seed, const BaselineOptions& options = {});

/// `p,d,status,i_save` with grid values; i_save empty unless status is boundary.
void write_boundary_csv(std::ostream& out, const BoundaryLine& bl);
/// Parses write_boundary_csv output. The space comes from the `#` preamble.
BoundaryLine read_boundary_csv(std::istream& in);

/// `# space ...` preamble line shared by the CSV formats.
std::string space_preamble(const ParamSpace& space);
std::optional<ParamSpace> parse_space_preamble(std::string_view line);

/// Grid index of `value` on `axis`, if it lies on the grid within 1e-6 steps.
std::optional<std::size_t> axis_index(const GridAxis& axis, double value);

}  // namespace pidlab
