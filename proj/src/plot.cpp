#include "pidlab/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pidlab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plane_svg(const PlotInput& input) {
  if (input.grid == nullptr && input.boundary == nullptr) {
    throw ConfigError("plot: need a grid or a boundary line");
  }
  const ParamSpace& space = input.grid ? input.grid->space() : input.boundary->space;
  if (input.grid && input.boundary && !(input.grid->space() == input.boundary->space)) {
    throw ConfigError("plot: grid and boundary line use different spaces");
  }
  if (input.p >= space.n_p()) throw ConfigError("plot: p index out of range");

  const std::size_t n_i = space.n_i();
  const std::size_t n_d = space.n_d();
  const double width = 2 * kMarginPx + kCellPx * static_cast<double>(n_d);
  const double height = 2 * kMarginPx + kCellPx * static_cast<double>(n_i);
  // Continuous grid coordinates to pixels; integer indices land on cell centres.
  const auto x_of = [&](double d) { return kMarginPx + (d + 0.5) * kCellPx; };
  const auto y_of = [&](double i) {
    return kMarginPx + (static_cast<double>(n_i) - 0.5 - i) * kCellPx;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  svg << "<defs><clipPath id=\"plane\"><rect x=\"" << fmt(kMarginPx) << "\" y=\""
      << fmt(kMarginPx) << "\" width=\"" << fmt(kCellPx * n_d) << "\" height=\""
      << fmt(kCellPx * n_i) << "\"/></clipPath></defs>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!input.title.empty()) {
    svg << "<text x=\"" << fmt(width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"13\">" << escape(input.title) << "</text>\n";
  }

  if (input.grid) {
    svg << "<g id=\"cells\" stroke=\"none\">\n";
    for (std::size_t d = 0; d < n_d; ++d) {
      for (std::size_t i = 0; i < n_i; ++i) {
        const Label l = input.grid->label({input.p, i, d});
        if (l == Label::Uncovered) continue;
        svg << "<rect class=\"" << (l == Label::Valid ? "valid" : "invalid") << "\" x=\""
            << fmt(x_of(static_cast<double>(d)) - kCellPx / 2) << "\" y=\""
            << fmt(y_of(static_cast<double>(i)) - kCellPx / 2) << "\" width=\"" << fmt(kCellPx)
            << "\" height=\"" << fmt(kCellPx) << "\" fill=\""
            << (l == Label::Valid ? "#cde8c9" : "#f0b3ae") << "\"/>\n";
      }
    }
    svg << "</g>\n";
  }

  svg << "<rect x=\"" << fmt(kMarginPx) << "\" y=\"" << fmt(kMarginPx) << "\" width=\""
      << fmt(kCellPx * n_d) << "\" height=\"" << fmt(kCellPx * n_i)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  if (input.plant) {
    const double gain = space.p.value(input.p) + input.plant->a1;
    if (gain > 0.0) {
      svg << "<polyline id=\"theory\" clip-path=\"url(#plane)\" fill=\"none\" stroke=\"#1f4e9c\" "
          << "stroke-width=\"1.5\" stroke-dasharray=\"5 3\" points=\"";
      for (std::size_t d = 0; d < n_d; ++d) {
        const double ki = gain * (space.d.value(d) + input.plant->a2);
        const double idx = (ki - space.i.min) / space.i.step;
        svg << (d ? " " : "") << fmt(x_of(static_cast<double>(d))) << ','
            << fmt(std::clamp(y_of(idx), 0.0, height));
      }
      svg << "\"/>\n";
    }
  }

  if (input.boundary) {
    std::vector<std::pair<double, double>> points;
    bool any_split = false;
    for (std::size_t d = 0; d < n_d; ++d) {
      const BoundaryEntry* e = input.boundary->find(input.p, d);
      if (e == nullptr) continue;
      double edge = static_cast<double>(n_i) - 0.5;
      switch (e->result.status) {
        case ColumnStatus::Boundary:
          edge = static_cast<double>(e->result.i_save) + 0.5;
          any_split = true;
          break;
        case ColumnStatus::AllInvalid:
          edge = -0.5;
          any_split = true;
          break;
        case ColumnStatus::AllValid: break;
      }
      points.emplace_back(x_of(static_cast<double>(d)), y_of(edge));
    }
    if (any_split) {
      svg << "<polyline id=\"boundary\" fill=\"none\" stroke=\"#b00020\" stroke-width=\"2\" "
          << "points=\"";
      for (std::size_t k = 0; k < points.size(); ++k) {
        svg << (k ? " " : "") << fmt(points[k].first) << ',' << fmt(points[k].second);
      }
      svg << "\"/>\n";
    }
  }

  const double axis_y = kMarginPx + kCellPx * n_i;
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << fmt(width / 2) << "\" y=\"" << fmt(axis_y + 30)
      << "\" text-anchor=\"middle\">kd [" << fmt(space.d.min) << ", "
      << fmt(space.d.value(n_d - 1)) << "]</text>\n";
  svg << "<text x=\"14\" y=\"" << fmt(kMarginPx + kCellPx * n_i / 2)
      << "\" transform=\"rotate(-90 14 " << fmt(kMarginPx + kCellPx * n_i / 2)
      << ")\" text-anchor=\"middle\">ki [" << fmt(space.i.min) << ", "
      << fmt(space.i.value(n_i - 1)) << "]</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace pidlab
