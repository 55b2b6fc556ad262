#pragma once

// Ground truth, predicted regions and miss/hit rates.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pidlab/search.hpp"
#include "pidlab/validator.hpp"

namespace pidlab {

/// Sub-grid stride per axis; {1, 1, 1} is exhaustive.
struct Coverage {
  std::size_t p = 1;
  std::size_t i = 1;
  std::size_t d = 1;

  bool exhaustive() const { return p == 1 && i == 1 && d == 1; }
  friend bool operator==(const Coverage&, const Coverage&) = default;
};

enum class Label : std::int8_t { Uncovered = -1, Invalid = 0, Valid = 1 };

class ClassifiedGrid {
 public:
  ClassifiedGrid() = default;
  ClassifiedGrid(ParamSpace space, Coverage coverage);

  const ParamSpace& space() const { return space_; }
  const Coverage& coverage() const { return coverage_; }

  bool covers(const GridIndex& g) const;
  /// Covered points in linear order.
  std::vector<GridIndex> covered_points() const;
  std::size_t covered_count() const;

  Label label(const GridIndex& g) const { return labels_[space_.linear(g)]; }
  /// Throws std::invalid_argument for a point outside the coverage.
  void set(const GridIndex& g, bool valid);

  std::vector<GridIndex> invalid_points() const;
  bool complete() const;  // every covered point labeled

  friend bool operator==(const ClassifiedGrid&, const ClassifiedGrid&) = default;

 private:
  ParamSpace space_{};
  Coverage coverage_{};
  std::vector<Label> labels_;
};

/// Validates every covered point, batched and spread over `workers` threads.
ClassifiedGrid ground_truth(const ParamSpace& space, Validator& validator,
                            const Coverage& coverage = {}, std::size_t workers = 1);

/// Predicted invalid set: i above i_save on boundary columns, whole
/// all_invalid columns, nothing on all_valid columns. Throws ConfigError if
/// the line does not cover every column.
std::vector<GridIndex> region_from_boundary(const BoundaryLine& bl);

struct Metrics {
  std::size_t gt_size = 0;
  std::size_t rs_size = 0;
  std::size_t intersection = 0;
  double mr = 0.0;
  double hr = 1.0;
  std::vector<std::string> flags;  // "empty_gt", "empty_rs"
};

/// RS is restricted to the points GT covers before counting.
Metrics evaluate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs);
double miss_rate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs);
double hit_rate(const ClassifiedGrid& gt, const std::vector<GridIndex>& rs);

struct OracleComparison {
  struct Row {
    PidConfig pid;
    bool offline = true;
    bool online = true;
    bool reference = true;
  };
  std::vector<Row> rows;
  double offline_agreement = 1.0;
  double online_agreement = 1.0;
};

/// Offline and online verdicts per configuration, scored against an offline
/// oracle run with 10x the mission duration and horizon.
OracleComparison compare_oracles(const std::vector<PidConfig>& configs, const Mission& mission,
                                 const PlantModel& plant, std::size_t window,
                                 std::uint64_t base_seed = 0, std::size_t workers = 1);

/// `kp,ki,kd,label` with `# space` and `# coverage` preamble lines.
void write_grid_csv(std::ostream& out, const ClassifiedGrid& grid);
ClassifiedGrid read_grid_csv(std::istream& in);

/// Invalid-set CSV for baselines: same layout, every row labeled invalid.
void write_invalid_set_csv(std::ostream& out, const ParamSpace& space,
                           const std::vector<GridIndex>& invalid);

}  // namespace pidlab
