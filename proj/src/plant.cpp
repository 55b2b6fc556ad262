#include "pidlab/plant.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "pidlab/kernels.hpp"

namespace pidlab {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be finite");
  }
}

void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (!(value > 0.0)) {
    throw ConfigError(std::string(name) + " must be > 0");
  }
}

ReferencePoint reference_unchecked(const Mission& m, double t) {
  const MissionParams& p = m.params;
  switch (m.mode) {
    case MissionMode::Hold:
      return {p.hold_setpoint, 0.0};
    case MissionMode::Brake:
      if (t < p.brake_at) return {p.cruise_speed * t, p.cruise_speed};
      return {p.cruise_speed * p.brake_at, 0.0};
    case MissionMode::CircleTrack: {
      const double w = 2.0 * std::numbers::pi * p.circle_freq;
      return {p.circle_radius * std::sin(w * t), p.circle_radius * w * std::cos(w * t)};
    }
    case MissionMode::ReturnHome: {
      const double out_speed = p.home_distance / p.outbound_time;
      const double back_speed = p.home_distance / p.return_time;
      if (t < p.outbound_time) return {out_speed * t, out_speed};
      if (t < p.return_start) return {p.home_distance, 0.0};
      const double back = t - p.return_start;
      if (back < p.return_time) return {p.home_distance - back_speed * back, -back_speed};
      return {0.0, 0.0};
    }
  }
  return {};
}

}  // namespace

void PlantModel::check() const {
  require_finite(a1, "plant.a1");
  require_finite(a2, "plant.a2");
  require_positive(dt, "plant.dt");
  require_finite(t_max, "plant.t_max");
  if (t_max < 10.0 * dt) throw ConfigError("plant.t_max must be >= 10 * dt");
  require_finite(noise.sensor_sigma, "noise.sensor_sigma");
  require_finite(noise.disturbance_amp, "noise.disturbance_amp");
  require_finite(noise.disturbance_freq, "noise.disturbance_freq");
  if (noise.sensor_sigma < 0.0 || noise.disturbance_amp < 0.0 || noise.disturbance_freq < 0.0) {
    throw ConfigError("noise magnitudes must be >= 0");
  }
}

std::string_view to_string(MissionMode mode) {
  switch (mode) {
    case MissionMode::ReturnHome: return "return_home";
    case MissionMode::Brake: return "brake";
    case MissionMode::CircleTrack: return "circle_track";
    case MissionMode::Hold: return "hold";
  }
  return "unknown";
}

std::optional<MissionMode> parse_mission_mode(std::string_view name) {
  for (auto mode : {MissionMode::ReturnHome, MissionMode::Brake, MissionMode::CircleTrack,
                    MissionMode::Hold}) {
    if (name == to_string(mode)) return mode;
  }
  return std::nullopt;
}

Mission Mission::make(MissionMode mode) {
  Mission m;
  m.mode = mode;
  switch (mode) {
    case MissionMode::Hold:
      m.duration = 60.0;
      m.params.settle_deadline = 30.0;
      break;
    case MissionMode::Brake:
      m.duration = 60.0;
      break;
    case MissionMode::CircleTrack:
      m.duration = 60.0;
      m.params.settle_deadline = 20.0;
      break;
    case MissionMode::ReturnHome:
      m.duration = 120.0;
      m.params.settle_deadline = 90.0;
      break;
  }
  return m;
}

void Mission::check() const {
  require_positive(duration, "mission.duration");
  const MissionParams& p = params;
  switch (mode) {
    case MissionMode::Hold:
      require_finite(p.hold_setpoint, "mission.hold_setpoint");
      require_positive(p.hold_tol, "mission.hold_tol");
      require_positive(p.settle_deadline, "mission.settle_deadline");
      break;
    case MissionMode::Brake:
      require_positive(p.cruise_speed, "mission.cruise_speed");
      require_positive(p.brake_at, "mission.brake_at");
      require_positive(p.brake_deadline, "mission.brake_deadline");
      require_positive(p.v_stop, "mission.v_stop");
      break;
    case MissionMode::CircleTrack:
      require_positive(p.circle_radius, "mission.circle_radius");
      require_positive(p.circle_freq, "mission.circle_freq");
      require_positive(p.circle_tol, "mission.circle_tol");
      require_positive(p.settle_deadline, "mission.settle_deadline");
      require_positive(p.lap_fraction, "mission.lap_fraction");
      break;
    case MissionMode::ReturnHome:
      require_positive(p.home_distance, "mission.home_distance");
      require_positive(p.outbound_time, "mission.outbound_time");
      require_positive(p.return_time, "mission.return_time");
      require_positive(p.home_radius, "mission.home_radius");
      require_positive(p.mono_eps, "mission.mono_eps");
      require_positive(p.settle_deadline, "mission.settle_deadline");
      if (p.return_start < p.outbound_time) {
        throw ConfigError("mission.return_start must be >= mission.outbound_time");
      }
      break;
  }
}

ReferencePoint reference_at(const Mission& mission, double t) {
  if (!(t >= 0.0 && t <= mission.duration)) {
    throw std::out_of_range("reference_at: t outside [0, duration]");
  }
  return reference_unchecked(mission, t);
}

double disturbance_at(const NoiseSpec& noise, double t) {
  if (noise.disturbance_amp == 0.0 || noise.disturbance_freq == 0.0) return 0.0;
  const double cycles = noise.disturbance_freq * t;
  const double phase = cycles - std::floor(cycles);
  return noise.disturbance_amp * (2.0 * phase - 1.0);
}

std::size_t sample_count(const PlantModel& plant, const Mission& mission) {
  const double horizon = std::min(plant.t_max, mission.duration);
  return static_cast<std::size_t>(std::floor(horizon / plant.dt + 1e-9)) + 1;
}

Trajectory simulate(const PlantModel& plant, const PidConfig& pid, const Mission& mission) {
  const std::uint64_t seed = plant.noise.seed;
  return std::move(simulate_batch(plant, mission, std::span(&pid, 1), std::span(&seed, 1))[0]);
}

std::vector<Trajectory> simulate_batch(const PlantModel& plant, const Mission& mission,
                                       std::span<const PidConfig> pids,
                                       std::span<const std::uint64_t> seeds) {
  plant.check();
  mission.check();
  if (seeds.size() != pids.size()) {
    throw std::invalid_argument("simulate_batch: one seed per configuration required");
  }
  for (const PidConfig& pid : pids) {
    if (!std::isfinite(pid.kp) || !std::isfinite(pid.ki) || !std::isfinite(pid.kd)) {
      throw ConfigError("PID gains must be finite");
    }
  }

  const std::size_t lanes = pids.size();
  const std::size_t n = sample_count(plant, mission);
  const double dt = plant.dt;

  std::vector<double> kp(lanes), ki(lanes), kd(lanes);
  for (std::size_t j = 0; j < lanes; ++j) {
    kp[j] = pids[j].kp;
    ki[j] = pids[j].ki;
    kd[j] = pids[j].kd;
  }
  std::vector<double> x(lanes, 0.0), v(lanes, 0.0), z(lanes, 0.0), noise(lanes, 0.0);

  const bool noisy = plant.noise.has_sensor_noise();
  std::vector<std::mt19937_64> rngs;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::normal_distribution<double>> gaussians;
  if (noisy) {
    rngs.reserve(lanes);
    for (std::uint64_t s : seeds) rngs.emplace_back(s);
    gaussians.assign(lanes, gauss);
  }

  std::vector<Trajectory> out(lanes);
  const ReferencePoint r0 = reference_unchecked(mission, 0.0);
  for (auto& traj : out) {
    traj.dt = dt;
    traj.samples.reserve(n);
    traj.samples.push_back({0.0, 0.0, 0.0, r0.position, r0.position, mission.mode});
  }

  const kernels::Rk4StepFn step = kernels::rk4_step();
  const kernels::PlantCoeffs coeffs{plant.a1, plant.a2};
  kernels::StageInputs in{};
  for (std::size_t k = 1; k < n; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double t1 = static_cast<double>(k) * dt;
    const double stage_t[3] = {t0, t0 + 0.5 * dt, t1};
    for (int s = 0; s < 3; ++s) {
      const ReferencePoint ref = reference_unchecked(mission, stage_t[s]);
      in.r[s] = ref.position;
      in.rd[s] = ref.velocity;
      in.dist[s] = disturbance_at(plant.noise, stage_t[s]);
    }
    if (noisy) {
      for (std::size_t j = 0; j < lanes; ++j) {
        noise[j] = plant.noise.sensor_sigma * gaussians[j](rngs[j]);
      }
    }
    step(coeffs, dt, in, kernels::LaneGains{kp.data(), ki.data(), kd.data()}, noise.data(),
         kernels::LaneState{x.data(), v.data(), z.data()}, lanes);
    const double r = in.r[2];
    for (std::size_t j = 0; j < lanes; ++j) {
      out[j].samples.push_back({t1, x[j], v[j], r, r - x[j], mission.mode});
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,x,v,r,e,mode\n";
  out << std::setprecision(9);
  for (const Sample& s : trajectory.samples) {
    out << s.t << ',' << s.x << ',' << s.v << ',' << s.r << ',' << s.e << ','
        << to_string(s.mode) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,v,r,e,mode", 0) != 0) {
    throw ConfigError("trajectory CSV: expected header t,x,v,r,e,mode");
  }
  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    Sample s;
    std::string field;
    double* targets[5] = {&s.t, &s.x, &s.v, &s.r, &s.e};
    for (double* target : targets) {
      if (!std::getline(row, field, ',')) {
        throw ConfigError("trajectory CSV line " + std::to_string(lineno) + ": missing field");
      }
      *target = std::stod(field);
    }
    std::getline(row, field);
    auto mode = parse_mission_mode(field);
    if (!mode) {
      throw ConfigError("trajectory CSV line " + std::to_string(lineno) + ": unknown mode '" +
                        field + "'");
    }
    s.mode = *mode;
    traj.samples.push_back(s);
  }
  if (traj.samples.size() >= 2) traj.dt = traj.samples[1].t - traj.samples[0].t;
  return traj;
}

}  // namespace pidlab
