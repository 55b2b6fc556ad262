#include <thread>

#include "doctest.h"
#include "pidlab/validator.hpp"
#include "support.hpp"

using namespace pidlab;
using pidlab::testing::hold;
using pidlab::testing::noiseless_plant;

TEST_SUITE("validator") {
  TEST_CASE("noiseless hold verdicts") {
    const Verdict ok = validate({1.0, 0.5, 1.0}, hold(), noiseless_plant(), {});
    CHECK(ok.valid);
    CHECK_FALSE(ok.violated_spec.has_value());
    CHECK(ok.runs == 1);
    CHECK(ok.votes_valid == 1);

    const Verdict bad = validate({1.0, 5.0, 1.0}, hold(), noiseless_plant(), {});
    CHECK_FALSE(bad.valid);
    REQUIRE(bad.violated_spec.has_value());
    CHECK(*bad.violated_spec == "hold.deviation");
  }

  TEST_CASE("majority vote") {
    const Verdict two_of_three = tally_votes({"", "hold.deviation", ""});
    CHECK(two_of_three.valid);
    CHECK(two_of_three.votes_valid == 2);
    CHECK(two_of_three.runs == 3);
    CHECK_FALSE(two_of_three.violated_spec.has_value());

    const Verdict one_of_three = tally_votes({"x", "", "y"});
    CHECK_FALSE(one_of_three.valid);
    CHECK(one_of_three.violated_spec == "x");
    for (const Verdict& v : {two_of_three, one_of_three}) {
      CHECK(v.valid == (2 * v.votes_valid > v.runs));
    }
  }

  TEST_CASE("repeats run several simulations for one query") {
    PlantModel plant = noiseless_plant();
    plant.noise = {3.0, 1.0, 0.3, 0};
    OracleConfig cfg;
    cfg.repeats = 5;
    cfg.base_seed = 7;
    SimulationValidator v(plant, hold(), cfg);
    const std::uint64_t before = global_query_count();
    const Verdict verdict = v.validate({1.0, 1.0, 0.5});
    CHECK(global_query_count() - before == 1);
    CHECK(v.queries() == 1);
    CHECK(verdict.runs == 5);
    CHECK(verdict.valid == (2 * verdict.votes_valid > 5));
  }

  TEST_CASE("query accounting across batches and threads") {
    FunctionValidator v([](const PidConfig&) { return true; });
    const std::uint64_t before = global_query_count();
    std::vector<PidConfig> batch(13, PidConfig{1, 1, 1});
    v.validate_batch(batch);
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&v] {
        for (int n = 0; n < 250; ++n) v.validate({1, 1, 1});
      });
    }
    threads.clear();
    CHECK(v.queries() == 1013);
    CHECK(global_query_count() - before >= 1013);
  }

  TEST_CASE("deterministic under noise, batch equals single") {
    PlantModel plant = noiseless_plant();
    plant.noise = {3.0, 1.0, 0.3, 0};
    OracleConfig cfg;
    cfg.base_seed = 3;
    SimulationValidator a(plant, hold(), cfg), b(plant, hold(), cfg);
    std::vector<PidConfig> pids;
    for (int k = 0; k < 40; ++k) pids.push_back({1.0, 0.1 * k, 0.02 * k});
    const auto batch = a.validate_batch(pids);
    int invalid = 0;
    for (std::size_t k = 0; k < pids.size(); ++k) {
      const Verdict single = b.validate(pids[k]);
      REQUIRE(single.valid == batch[k].valid);
      REQUIRE(single.violated_spec == batch[k].violated_spec);
      invalid += !single.valid;
    }
    CHECK(invalid > 0);
  }

  TEST_CASE("noise seeds per run") {
    OracleConfig cfg;
    cfg.base_seed = 10;
    const PidConfig a{1.0, 0.5, 1.0}, b{1.0, 0.6, 1.0};
    CHECK(run_seed(cfg, 0, a) != run_seed(cfg, 0, b));
    CHECK(run_seed(cfg, 0, a) != run_seed(cfg, 1, a));
    CHECK(run_seed(cfg, 2, a) == run_seed(cfg, 2, a));
    cfg.per_config_noise = false;
    CHECK(run_seed(cfg, 0, a) == 10);
    CHECK(run_seed(cfg, 2, b) == 12);
  }

  TEST_CASE("oracle configuration checks") {
    OracleConfig cfg;
    cfg.repeats = 2;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg.repeats = 0;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg.repeats = 3;
    cfg.kind = OracleKind::Online;
    cfg.window = 1;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg.window = 2;
    CHECK_NOTHROW(cfg.check());
    CHECK(parse_oracle_kind("online") == OracleKind::Online);
    CHECK_FALSE(parse_oracle_kind("batch").has_value());
  }

  TEST_CASE("custom formula") {
    SimulationValidator v(noiseless_plant(), hold(), {},
                          mtl::parse("(label bounded (G (< (abs x) 1.2)))"));
    CHECK(v.validate({1.0, 0.5, 1.0}).valid);
    const Verdict bad = v.validate({1.0, 5.0, 1.0});
    CHECK_FALSE(bad.valid);
    CHECK(bad.violated_spec == "bounded");
  }
}
