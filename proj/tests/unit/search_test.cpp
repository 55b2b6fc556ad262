#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pidlab/evalkit.hpp"
#include "pidlab/search.hpp"
#include "support.hpp"

using namespace pidlab;
using pidlab::testing::as_set;
using pidlab::testing::plane;
using pidlab::testing::RecordingValidator;
using pidlab::testing::routh_validator;

namespace {

const GridAxis kI{0.1, 4.0, 0.1};

bool on_grid(const ParamSpace& s, const PidConfig& c) {
  const auto p = axis_index(s.p, c.kp), i = axis_index(s.i, c.ki), d = axis_index(s.d, c.kd);
  return p && i && d && s.at({*p, *i, *d}) == c;
}

double i_value(const BoundaryLine& bl, std::size_t p, std::size_t d) {
  const BoundaryEntry* e = bl.find(p, d);
  REQUIRE(e != nullptr);
  REQUIRE(e->result.status == ColumnStatus::Boundary);
  return bl.space.i.value(e->result.i_save);
}

}  // namespace

TEST_SUITE("search") {
  TEST_CASE("grid axes") {
    CHECK(kI.size() == 40);
    CHECK(kI.value(39) == doctest::Approx(4.0));
    CHECK(GridAxis{0.0, 0.98, 0.02}.size() == 50);
    CHECK(GridAxis{1.0, 1.0, 1.0}.size() == 1);
    ParamSpace bad = plane(1.0, {0.1, 4.0, 0.0}, {0.0, 1.0, 0.5});
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad.i = {0.1, 4.0, 5.0};
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad.i = {4.0, 0.1, 0.1};
    CHECK_THROWS_AS(bad.check(), ConfigError);
    const ParamSpace s{{0.5, 1.5, 0.5}, kI, {0.0, 1.0, 0.5}};
    for (std::size_t k = 0; k < s.total(); ++k) REQUIRE(s.linear(s.unlinear(k)) == k);
    CHECK(axis_index(kI, 2.9) == 28u);
    CHECK_FALSE(axis_index(kI, 2.95).has_value());
  }

  TEST_CASE("column walks") {
    const ParamSpace s = plane(1.0, kI, {0.0, 1.0, 0.5});
    auto v = routh_validator();
    const ColumnResult down = search_column(s, 0, 39, 1, Direction::Down, v);
    CHECK(down.status == ColumnStatus::Boundary);
    CHECK(s.i.value(down.i_save) == doctest::Approx(2.9));
    const ColumnResult up = search_column(s, 0, *axis_index(kI, 2.0), 1, Direction::Up, v);
    CHECK(up == down);

    const ParamSpace dead = plane(-2.0, kI, {0.0, 1.0, 0.5});
    CHECK(search_column(dead, 0, 39, 0, Direction::Down, v).status == ColumnStatus::AllInvalid);
    const ParamSpace easy = plane(9.0, kI, {0.0, 1.0, 0.5});
    CHECK(search_column(easy, 0, 0, 0, Direction::Up, v).status == ColumnStatus::AllValid);
  }

  TEST_CASE("boundary on the noiseless plane") {
    const ParamSpace s = plane(1.0, kI, {0.0, 1.0, 0.5});
    auto v = routh_validator();
    const BoundaryLine bl = identify_boundary(s, v);
    REQUIRE(bl.complete());
    CHECK(i_value(bl, 0, 0) == doctest::Approx(1.9));
    CHECK(i_value(bl, 0, 1) == doctest::Approx(2.9));
    CHECK(i_value(bl, 0, 2) == doctest::Approx(3.9));
    CHECK(bl.queries == v.queries());
  }

  TEST_CASE("whole plane invalid") {
    const ParamSpace s = plane(-2.0, kI, {0.0, 1.0, 0.5});
    auto v = routh_validator();
    const BoundaryLine bl = identify_boundary(s, v);
    for (const BoundaryEntry& e : bl.entries) CHECK(e.result.status == ColumnStatus::AllInvalid);
    CHECK(region_from_boundary(bl).size() == s.total());
  }

  TEST_CASE("linear query cost on a 60x60 plane") {
    const ParamSpace s = plane(1.0, {0.1, 6.0, 0.1}, {0.0, 1.18, 0.02});
    REQUIRE(s.n_i() == 60);
    REQUIRE(s.n_d() == 60);
    auto v = routh_validator();
    const std::uint64_t before = global_query_count();
    const BoundaryLine bl = identify_boundary(s, v);
    CHECK(bl.queries <= 5 * (s.n_i() + s.n_d()));
    CHECK(global_query_count() - before == bl.queries);
  }

  TEST_CASE("boundary brackets and grid closure") {
    const ParamSpace s{{0.5, 2.0, 0.5}, kI, {0.0, 1.0, 0.1}};
    RecordingValidator v([](const PidConfig& c) { return routh_stable(c, 1.0, 1.0); });
    const BoundaryLine bl = identify_boundary(s, v, {true, 3});
    for (const PidConfig& c : v.probes()) REQUIRE(on_grid(s, c));
    for (const BoundaryEntry& e : bl.entries) {
      if (e.result.status != ColumnStatus::Boundary) continue;
      CHECK(routh_stable(s.at({e.p, e.result.i_save, e.d}), 1.0, 1.0));
      if (e.result.i_save + 1 < s.n_i()) {
        CHECK_FALSE(routh_stable(s.at({e.p, e.result.i_save + 1, e.d}), 1.0, 1.0));
      }
    }
  }

  TEST_CASE("synthetic monotone labels round trip exactly") {
    std::mt19937_64 rng(4);
    const ParamSpace s{{0.0, 2.0, 1.0}, {0.0, 2.9, 0.1}, {0.0, 1.9, 0.1}};
    for (int trial = 0; trial < 25; ++trial) {
      // f(p, d) in [-1, n_i - 1]; -1 is a fully invalid column, n_i - 1 fully valid.
      std::vector<int> f(s.n_p() * s.n_d());
      std::uniform_int_distribution<int> pick(-1, static_cast<int>(s.n_i()) - 1);
      for (int& x : f) x = pick(rng);
      const auto threshold = [&](std::size_t p, std::size_t d) { return f[p * s.n_d() + d]; };
      FunctionValidator v([&](const PidConfig& c) {
        const std::size_t p = *axis_index(s.p, c.kp), i = *axis_index(s.i, c.ki),
                          d = *axis_index(s.d, c.kd);
        return static_cast<int>(i) <= threshold(p, d);
      });
      const BoundaryLine bl = identify_boundary(s, v);
      std::set<GridIndex> expected;
      for (std::size_t k = 0; k < s.total(); ++k) {
        const GridIndex g = s.unlinear(k);
        if (static_cast<int>(g.i) > threshold(g.p, g.d)) expected.insert(g);
      }
      REQUIRE(as_set(region_from_boundary(bl)) == expected);
    }
  }

  TEST_CASE("the ablation matches on noiseless and all-valid planes") {
    const ParamSpace s = plane(1.0, {0.1, 5.0, 0.1}, {0.0, 0.98, 0.02});
    auto a = routh_validator(), b = routh_validator();
    const BoundaryLine cs = identify_boundary(s, a);
    const BoundaryLine off = identify_boundary_dsoff(s, b);
    REQUIRE(cs.entries.size() == off.entries.size());
    for (std::size_t k = 0; k < cs.entries.size(); ++k) {
      CHECK(cs.entries[k].result == off.entries[k].result);
    }

    FunctionValidator all_ok([](const PidConfig&) { return true; });
    const BoundaryLine v1 = identify_boundary(s, all_ok);
    const BoundaryLine v2 = identify_boundary_dsoff(s, all_ok);
    for (std::size_t k = 0; k < v1.entries.size(); ++k) {
      CHECK(v1.entries[k].result.status == ColumnStatus::AllValid);
      CHECK(v1.entries[k].result == v2.entries[k].result);
    }
  }

  TEST_CASE("the ablation keeps the carried value on a dip") {
    // Per-column thresholds on the i index; column 1 dips far below the others.
    const ParamSpace s = plane(1.0, {0.0, 2.9, 0.1}, {0.0, 0.3, 0.1});
    const std::array<std::size_t, 4> top{20, 5, 10, 25};
    FunctionValidator v([&](const PidConfig& c) {
      return *axis_index(s.i, c.ki) <= top[*axis_index(s.d, c.kd)];
    });
    const BoundaryLine cs = identify_boundary(s, v);
    const BoundaryLine off = identify_boundary_dsoff(s, v);
    for (std::size_t d = 0; d < 4; ++d) CHECK(cs.find(0, d)->result.i_save == top[d]);
    // The first column still descends; afterwards an invalid start keeps the carry.
    CHECK(off.find(0, 0)->result.i_save == 20);
    CHECK(off.find(0, 1)->result.i_save == 20);
    CHECK(off.find(0, 2)->result.i_save == 20);
    CHECK(off.find(0, 3)->result.i_save == 25);
    CHECK(region_from_boundary(off).size() < region_from_boundary(cs).size());
  }

  TEST_CASE("plane-parallel search is independent of the worker count") {
    const ParamSpace s{{0.2, 3.0, 0.2}, kI, {0.0, 1.0, 0.05}};
    auto a = routh_validator(), b = routh_validator();
    const BoundaryLine one = identify_boundary(s, a, {true, 1});
    const BoundaryLine many = identify_boundary(s, b, {true, 4});
    REQUIRE(one.entries.size() == many.entries.size());
    for (std::size_t k = 0; k < one.entries.size(); ++k) {
      REQUIRE(one.entries[k].result == many.entries[k].result);
    }
    CHECK(one.queries == many.queries);
  }

  TEST_CASE("baseline trivial cases") {
    const ParamSpace s{{0.5, 1.5, 0.5}, kI, {0.0, 1.0, 0.25}};
    FunctionValidator valid([](const PidConfig&) { return true; });
    FunctionValidator invalid([](const PidConfig&) { return false; });

    const SearchResult one = random_fuzz(s, valid, 1, 3);
    CHECK(one.invalid.empty());
    CHECK(one.queries == 1);
    CHECK(random_fuzz(s, invalid, 50, 3).invalid.size() == 50);
    CHECK(random_fuzz(s, invalid, 50, 3).queries == 50);

    CHECK(hill_climb(s, invalid, 1, 3).invalid.size() <= 1);
    CHECK(hill_climb(s, valid, 80, 3).invalid.empty());
    CHECK(hill_climb(s, valid, 80, 3).queries == 80);
    CHECK(hill_climb(s, invalid, 80, 3).invalid.size() == 80);

    const SearchResult ga = genetic_search(s, invalid, 20, 3);
    CHECK(ga.invalid.size() == 20);
    CHECK(ga.queries == 20);
    CHECK(genetic_search(s, valid, 100, 3).invalid.empty());
  }

  TEST_CASE("baselines spend exactly their budget on the grid") {
    const ParamSpace s{{0.5, 1.5, 0.5}, kI, {0.0, 1.0, 0.1}};
    for (int algo = 0; algo < 3; ++algo) {
      RecordingValidator v([](const PidConfig& c) { return routh_stable(c, 1.0, 1.0); });
      const std::uint64_t before = global_query_count();
      const SearchResult r = algo == 0   ? random_fuzz(s, v, 137, 9)
                             : algo == 1 ? hill_climb(s, v, 137, 9)
                                         : genetic_search(s, v, 137, 9);
      CHECK(r.queries == 137);
      CHECK(global_query_count() - before == 137);
      CHECK(v.probes().size() == 137);
      for (const PidConfig& c : v.probes()) REQUIRE(on_grid(s, c));
      for (const GridIndex& g : r.invalid) REQUIRE_FALSE(routh_stable(s.at(g), 1.0, 1.0));
      CHECK(std::is_sorted(r.invalid.begin(), r.invalid.end()));
    }
  }

  TEST_CASE("random fuzz and hill climbing stop when the grid is exhausted") {
    const ParamSpace s = plane(1.0, {0.1, 0.5, 0.1}, {0.0, 0.2, 0.1});
    FunctionValidator invalid([](const PidConfig&) { return false; });
    const SearchResult r = random_fuzz(s, invalid, 1000, 1);
    CHECK(r.queries == s.total());
    CHECK(r.invalid.size() == s.total());
    CHECK(hill_climb(s, invalid, 1000, 1).queries == s.total());
  }

  TEST_CASE("baselines are deterministic per seed") {
    const ParamSpace s{{0.5, 1.5, 0.5}, kI, {0.0, 1.0, 0.1}};
    auto v = routh_validator();
    CHECK(random_fuzz(s, v, 200, 5).invalid == random_fuzz(s, v, 200, 5).invalid);
    CHECK(hill_climb(s, v, 200, 5).invalid == hill_climb(s, v, 200, 5).invalid);
    CHECK(genetic_search(s, v, 200, 5).invalid == genetic_search(s, v, 200, 5).invalid);
    CHECK(random_fuzz(s, v, 200, 5).invalid != random_fuzz(s, v, 200, 6).invalid);
  }

  TEST_CASE("boundary CSV round trip") {
    const ParamSpace s{{0.5, 1.5, 0.5}, kI, {0.0, 1.0, 0.25}};
    auto v = routh_validator();
    const BoundaryLine bl = identify_boundary(s, v);
    std::stringstream out;
    write_boundary_csv(out, bl);
    const std::string text = out.str();
    CHECK(text.find("p,d,status,i_save\n") != std::string::npos);
    CHECK(text.find("1,0,boundary,1.9\n") != std::string::npos);
    std::istringstream in(text);
    const BoundaryLine back = read_boundary_csv(in);
    CHECK(back.space == s);
    REQUIRE(back.entries.size() == bl.entries.size());
    for (std::size_t k = 0; k < bl.entries.size(); ++k) {
      CHECK(back.entries[k].result == bl.entries[k].result);
    }

    std::istringstream broken("# space p 0.5 1.5 0.5 i 0.1 4 0.1 d 0 1 0.25\np,d,status,i_save\n"
                              "0.5,0,sideways,\n");
    CHECK_THROWS_AS(read_boundary_csv(broken), ConfigError);
    std::istringstream off_grid("# space p 0.5 1.5 0.5 i 0.1 4 0.1 d 0 1 0.25\n"
                                "p,d,status,i_save\n0.5,0,boundary,2.95\n");
    CHECK_THROWS_AS(read_boundary_csv(off_grid), ConfigError);
  }
}
