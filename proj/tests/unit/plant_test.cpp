#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "pidlab/plant.hpp"
#include "pidlab/stability.hpp"
#include "support.hpp"

using namespace pidlab;
using pidlab::testing::hold;
using pidlab::testing::noiseless_plant;

namespace {

// Closed-form Hold response: the noiseless loop is linear with constant
// input, so the augmented state (x, v, z, 1) evolves by a matrix exponential.
Eigen::Vector3d exact_hold_state(const PlantModel& plant, const PidConfig& c, double r, double t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 1) = 1.0;
  m(1, 0) = -(plant.a1 + c.kp);
  m(1, 1) = -(plant.a2 + c.kd);
  m(1, 2) = c.ki;
  m(1, 3) = c.kp * r;
  m(2, 0) = -1.0;
  m(2, 3) = r;
  const Eigen::Matrix4d e = (m * t).exp();
  return e.col(3).head<3>();
}

double max_abs_x_after(const Trajectory& tr, double t0) {
  double m = 0.0;
  for (const Sample& s : tr.samples) {
    if (s.t >= t0) m = std::max(m, std::abs(s.x));
  }
  return m;
}

double tail_envelope(const Trajectory& tr, double span) {
  const double t0 = tr.samples.back().t - span;
  double m = 0.0;
  for (const Sample& s : tr.samples) {
    if (s.t >= t0) m = std::max(m, std::abs(s.e));
  }
  return m;
}

}  // namespace

TEST_SUITE("plant") {
  TEST_CASE("stable hold run settles") {
    const Trajectory tr = simulate(noiseless_plant(), {1.0, 0.5, 1.0}, hold());
    REQUIRE(tr.size() == 6001);
    CHECK(std::abs(tr.samples.back().e) < 0.01);
  }

  TEST_CASE("unstable gains grow in amplitude") {
    const Trajectory tr = simulate(noiseless_plant(), {1.0, 5.0, 1.0}, hold());
    double early_window = 0.0, late_window = 0.0;
    for (const Sample& s : tr.samples) {
      const double dev = std::abs(s.e);
      if (s.t >= 10.0 && s.t < 20.0) early_window = std::max(early_window, dev);
      if (s.t >= 50.0) late_window = std::max(late_window, dev);
    }
    CHECK(max_abs_x_after(tr, 50.0) > 10.0);
    CHECK(late_window > 2.0 * early_window);
  }

  TEST_CASE("terminal error matches a run at dt/10") {
    PlantModel fine = noiseless_plant();
    fine.dt = 0.001;
    const PidConfig c{1.0, 0.5, 1.0};
    const Trajectory coarse = simulate(noiseless_plant(), c, hold());
    const Trajectory refined = simulate(fine, c, hold());
    REQUIRE(refined.size() == 60001);
    CHECK(std::abs(coarse.samples.back().e - refined.samples.back().e) < 1e-3);
  }

  TEST_CASE("RK4 matches the closed-form linear response") {
    const PlantModel plant = noiseless_plant();
    for (const PidConfig c : {PidConfig{1.0, 0.5, 1.0}, PidConfig{2.0, 1.5, 0.3},
                              PidConfig{0.5, 0.2, 0.0}}) {
      const Trajectory tr = simulate(plant, c, hold());
      double worst = 0.0;
      for (std::size_t k = 0; k < tr.size(); k += 97) {
        const Eigen::Vector3d s = exact_hold_state(plant, c, 1.0, tr[k].t);
        worst = std::max({worst, std::abs(s(0) - tr[k].x), std::abs(s(1) - tr[k].v)});
      }
      CHECK(worst < 1e-6);
    }
  }

  TEST_CASE("halving dt moves every common sample by less than 1e-3") {
    PlantModel half = noiseless_plant();
    half.dt = 0.005;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> kp(0.2, 4.0), kd(0.0, 2.0), frac(0.05, 0.95);
    for (int n = 0; n < 10; ++n) {
      const double p = kp(rng), d = kd(rng);
      const PidConfig c{p, frac(rng) * (p + 1.0) * (d + 1.0), d};
      const Trajectory a = simulate(noiseless_plant(), c, hold());
      const Trajectory b = simulate(half, c, hold());
      double worst = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k].x - b[2 * k].x));
      CHECK(worst < 1e-3);
    }
  }

  TEST_CASE("stable configurations converge") {
    // 10x10 sample strictly inside the stable region on the default plant.
    int checked = 0;
    for (int a = 0; a < 10; ++a) {
      for (int b = 0; b < 10; ++b) {
        const double kp = 0.5 + 0.35 * a;
        const double kd = 0.3 + 0.2 * b;
        const PidConfig c{kp, 0.3 * (kp + 1.0) * (kd + 1.0), kd};
        REQUIRE(routh_stable(c, 1.0, 1.0));
        const Trajectory long_run = simulate(noiseless_plant(120.0), c, hold(120.0));
        const Trajectory short_run = simulate(noiseless_plant(60.0), c, hold(120.0));
        CHECK(std::abs(long_run.samples.back().e) < 0.01);
        // Envelope over the last 10 s; a single sample can sit on a zero crossing.
        // Fast configurations reach the rounding floor by 60 s already.
        CHECK(tail_envelope(long_run, 10.0) <= tail_envelope(short_run, 10.0) + 1e-12);
        ++checked;
      }
    }
    CHECK(checked == 100);
  }

  TEST_CASE("determinism and noise-off seed independence") {
    PlantModel noisy = noiseless_plant();
    noisy.noise = {0.5, 0.3, 0.2, 42};
    const PidConfig c{1.0, 0.5, 1.0};
    const Trajectory a = simulate(noisy, c, hold());
    const Trajectory b = simulate(noisy, c, hold());
    REQUIRE(a.size() == b.size());
    bool same = true;
    for (std::size_t k = 0; k < a.size(); ++k) same = same && a[k].x == b[k].x && a[k].v == b[k].v;
    CHECK(same);

    noisy.noise.seed = 43;
    const Trajectory other = simulate(noisy, c, hold());
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) differs = differs || a[k].x != other[k].x;
    CHECK(differs);

    PlantModel quiet = noiseless_plant();
    quiet.noise.seed = 1;
    const Trajectory q1 = simulate(quiet, c, hold());
    quiet.noise.seed = 999;
    const Trajectory q2 = simulate(quiet, c, hold());
    bool equal = true;
    for (std::size_t k = 0; k < q1.size(); ++k) equal = equal && q1[k].x == q2[k].x;
    CHECK(equal);
  }

  TEST_CASE("batch lanes equal single runs") {
    PlantModel noisy = noiseless_plant();
    noisy.noise = {0.3, 0.2, 0.1, 0};
    std::vector<PidConfig> pids;
    std::vector<std::uint64_t> seeds;
    for (int j = 0; j < 7; ++j) {
      pids.push_back({0.5 + j, 0.3 * j, 0.1 * j});
      seeds.push_back(100 + j);
    }
    const auto batch = simulate_batch(noisy, hold(), pids, seeds);
    for (int j = 0; j < 7; ++j) {
      PlantModel single = noisy;
      single.noise.seed = seeds[j];
      const Trajectory one = simulate(single, pids[j], hold());
      bool same = true;
      for (std::size_t k = 0; k < one.size(); ++k) same = same && one[k].x == batch[j][k].x;
      CHECK(same);
    }
  }

  TEST_CASE("divergent runs saturate without throwing") {
    const Trajectory tr = simulate(noiseless_plant(), {1.0, 500.0, 0.0}, hold());
    for (const Sample& s : tr.samples) {
      REQUIRE(std::isfinite(s.x));
      REQUIRE(std::abs(s.x) <= kSaturation);
    }
    CHECK(std::abs(tr.samples.back().x) > 1e3);
  }

  TEST_CASE("reference schedules") {
    const Mission h = Mission::make(MissionMode::Hold);
    CHECK(reference_at(h, 0.0).position == 1.0);
    CHECK(reference_at(h, 37.5).position == 1.0);
    CHECK(reference_at(h, 37.5).velocity == 0.0);

    Mission b = Mission::make(MissionMode::Brake);
    b.params.brake_at = 5.0;
    CHECK(reference_at(b, 6.0).velocity == 0.0);
    CHECK(reference_at(b, 4.0).velocity == b.params.cruise_speed);

    Mission c = Mission::make(MissionMode::CircleTrack);
    c.params.circle_radius = 2.0;
    c.params.circle_freq = 0.05;
    const ReferencePoint r0 = reference_at(c, 0.0);
    CHECK(r0.position == doctest::Approx(0.0));
    CHECK(r0.velocity == doctest::Approx(2.0 * 2.0 * M_PI * 0.05));

    const Mission home = Mission::make(MissionMode::ReturnHome);
    CHECK(reference_at(home, home.duration).position == doctest::Approx(0.0));
    CHECK(reference_at(home, home.params.outbound_time).position ==
          doctest::Approx(home.params.home_distance));

    CHECK_THROWS_AS(reference_at(h, -0.1), std::out_of_range);
    CHECK_THROWS_AS(reference_at(h, h.duration + 0.1), std::out_of_range);
  }

  TEST_CASE("sawtooth disturbance") {
    const NoiseSpec n{0.0, 0.5, 0.2, 0};
    CHECK(disturbance_at(n, 0.0) == doctest::Approx(-0.5));
    CHECK(disturbance_at(n, 2.5) == doctest::Approx(0.0));
    CHECK(disturbance_at(n, 4.999) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(disturbance_at(NoiseSpec{}, 3.0) == 0.0);
  }

  TEST_CASE("invalid parameters are rejected") {
    PlantModel p = noiseless_plant();
    p.dt = 0.0;
    CHECK_THROWS_AS(simulate(p, {1, 1, 1}, hold()), ConfigError);
    p = noiseless_plant();
    p.a1 = std::nan("");
    CHECK_THROWS_AS(simulate(p, {1, 1, 1}, hold()), ConfigError);
    CHECK_THROWS_AS(simulate(noiseless_plant(), {1, INFINITY, 1}, hold()), ConfigError);
    Mission m = hold();
    m.duration = -1.0;
    CHECK_THROWS_AS(simulate(noiseless_plant(), {1, 1, 1}, m), ConfigError);
  }

  TEST_CASE("sample count follows the horizon") {
    CHECK(sample_count(noiseless_plant(60.0), hold(60.0)) == 6001);
    CHECK(sample_count(noiseless_plant(30.0), hold(60.0)) == 3001);
    CHECK(sample_count(noiseless_plant(120.0), hold(45.0)) == 4501);
  }

  TEST_CASE("trajectory CSV round trip keeps 9 significant digits") {
    const Trajectory tr = simulate(noiseless_plant(), {1.0, 0.5, 1.0}, hold(5.0));
    std::stringstream s;
    write_trajectory_csv(s, tr);
    std::string header;
    std::getline(s, header);
    CHECK(header == "t,x,v,r,e,mode");
    s.seekg(0);
    const Trajectory back = read_trajectory_csv(s);
    REQUIRE(back.size() == tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
      REQUIRE(back[k].x == doctest::Approx(tr[k].x).epsilon(1e-8));
      REQUIRE(back[k].mode == tr[k].mode);
    }
    CHECK(back.dt == doctest::Approx(tr.dt));
  }
}
