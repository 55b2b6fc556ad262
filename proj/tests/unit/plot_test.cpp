#include <cmath>

#include "doctest.h"
#include "pidlab/plot.hpp"
#include "support.hpp"

using namespace pidlab;
using pidlab::testing::plane;
using pidlab::testing::polyline_points;
using pidlab::testing::routh_validator;

TEST_SUITE("plot") {
  TEST_CASE("traced boundary stays within one cell of the analytic line") {
    const ParamSpace s = plane(1.0, {0.1, 5.0, 0.1}, {0.0, 0.98, 0.02});
    auto v = routh_validator();
    const ClassifiedGrid gt = ground_truth(s, v);
    const BoundaryLine bl = identify_boundary(s, v);
    PlotInput in;
    in.grid = &gt;
    in.boundary = &bl;
    in.plant = PlaneCoeffs{1.0, 1.0};
    in.title = "kp = 1";
    const std::string svg = render_plane_svg(in);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);

    const auto traced = polyline_points(svg, "boundary");
    const auto theory = polyline_points(svg, "theory");
    REQUIRE(traced.size() == s.n_d());
    REQUIRE(theory.size() == s.n_d());
    for (std::size_t k = 0; k < traced.size(); ++k) {
      REQUIRE(traced[k].first == theory[k].first);
      REQUIRE(std::abs(traced[k].second - theory[k].second) <= kCellPx);
    }

    std::size_t valid = 0, invalid = 0;
    for (auto at = svg.find("class=\"valid\""); at != std::string::npos;
         at = svg.find("class=\"valid\"", at + 1)) ++valid;
    for (auto at = svg.find("class=\"invalid\""); at != std::string::npos;
         at = svg.find("class=\"invalid\"", at + 1)) ++invalid;
    CHECK(valid + invalid == s.total());
    CHECK(invalid == gt.invalid_points().size());
  }

  TEST_CASE("all-valid plane has no boundary polyline") {
    const ParamSpace s = plane(1.0, {0.1, 1.0, 0.1}, {0.0, 1.0, 0.1});
    FunctionValidator ok([](const PidConfig&) { return true; });
    const BoundaryLine bl = identify_boundary(s, ok);
    PlotInput in;
    in.boundary = &bl;
    const std::string svg = render_plane_svg(in);
    CHECK(svg.find("id=\"boundary\"") == std::string::npos);
    CHECK(svg.find("id=\"theory\"") == std::string::npos);
  }

  TEST_CASE("bad inputs") {
    CHECK_THROWS_AS(render_plane_svg(PlotInput{}), ConfigError);
    const ParamSpace a = plane(1.0, {0.1, 1.0, 0.1}, {0.0, 1.0, 0.1});
    const ParamSpace b = plane(1.0, {0.1, 2.0, 0.1}, {0.0, 1.0, 0.1});
    auto v = routh_validator();
    const ClassifiedGrid g = ground_truth(a, v);
    const BoundaryLine bl = identify_boundary(b, v);
    PlotInput in;
    in.grid = &g;
    in.boundary = &bl;
    CHECK_THROWS_AS(render_plane_svg(in), ConfigError);
    in.boundary = nullptr;
    in.p = 3;
    CHECK_THROWS_AS(render_plane_svg(in), ConfigError);
  }
}
