#pragma once

// SVG rendering of one (i, d) plane: labeled cells, traced boundary and the
// analytic stability line.

#include <optional>
#include <string>

#include "pidlab/evalkit.hpp"
#include "pidlab/search.hpp"

namespace pidlab {

struct PlaneCoeffs {
  double a1;
  double a2;
};

struct PlotInput {
  const ClassifiedGrid* grid = nullptr;       // cell fills, optional
  const BoundaryLine* boundary = nullptr;     // polyline id="boundary", optional
  std::size_t p = 0;                          // plane index on the p axis
  std::optional<PlaneCoeffs> plant;           // dashed polyline id="theory"
  std::string title;
};

/// Columns run along d, rows along i (growing upward); every cell is
/// kCellPx square. Boundary vertices sit on the top edge of cell i_save at
/// column centres; theory vertices at the same x. No boundary polyline is
/// emitted when every column is all_valid. Throws ConfigError when there is
/// nothing to draw, the inputs disagree on the space, or p is out of range.
std::string render_plane_svg(const PlotInput& input);

inline constexpr double kCellPx = 12.0;
inline constexpr double kMarginPx = 48.0;

}  // namespace pidlab
