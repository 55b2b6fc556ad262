#pragma once

// Closed-loop second-order plant under PID control, the synthetic missions
// ("flight modes") it is flown through, and the sampled trajectories that the
// temporal-logic oracle consumes.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pidlab {

/// Raised for invalid plant, mission, space or oracle parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PidConfig {
  double kp = 0.0;
  double ki = 0.0;  // 1/s
  double kd = 0.0;  // s

  friend auto operator<=>(const PidConfig&, const PidConfig&) = default;
};

struct NoiseSpec {
  double sensor_sigma = 0.0;      // std-dev of additive noise on measured x
  double disturbance_amp = 0.0;   // sawtooth amplitude added to u
  double disturbance_freq = 0.0;  // Hz
  std::uint64_t seed = 0;

  bool has_sensor_noise() const { return sensor_sigma > 0.0; }
};

/// x'' + a2 x' + a1 x = u, integrated with fixed-step RK4.
struct PlantModel {
  double a1 = 1.0;
  double a2 = 1.0;
  double dt = 0.01;
  double t_max = 120.0;
  NoiseSpec noise{};

  /// Throws ConfigError when dt <= 0, t_max < 10 dt, or anything is non-finite.
  void check() const;
};

/// |x| and |v| are clamped here so divergent runs stay finite.
inline constexpr double kSaturation = 1e6;

enum class MissionMode : std::uint8_t { ReturnHome = 0, Brake = 1, CircleTrack = 2, Hold = 3 };

std::string_view to_string(MissionMode mode);
std::optional<MissionMode> parse_mission_mode(std::string_view name);

/// Mode-specific thresholds. Only the fields of the active mode are checked.
struct MissionParams {
  // Shared by Hold, CircleTrack and ReturnHome: specs only quantify after it.
  double settle_deadline = 30.0;

  // Hold: the vehicle is displaced from its hold point at t = 0.
  double hold_setpoint = 1.0;
  double hold_tol = 0.9;

  // Brake: cruise at constant speed, then command zero velocity.
  double cruise_speed = 1.0;
  double brake_at = 10.0;
  double brake_deadline = 20.0;
  double v_stop = 0.05;

  // CircleTrack: 1-D projection r(t) = R sin(2 pi f t).
  double circle_radius = 2.0;
  double circle_freq = 0.05;
  double circle_tol = 2.0;
  bool lap_check = false;      // also require the far side of every lap be reached
  double lap_fraction = 0.9;   // ... within this fraction of the radius

  // ReturnHome: outbound ramp, dwell, ramp back to the origin.
  double home_distance = 5.0;
  double outbound_time = 30.0;
  double return_start = 40.0;
  double return_time = 30.0;
  double home_radius = 0.5;
  double mono_eps = 0.02;
};

struct Mission {
  MissionMode mode = MissionMode::Hold;
  MissionParams params{};
  double duration = 60.0;

  /// Default thresholds and duration for a mode.
  static Mission make(MissionMode mode);

  void check() const;
};

struct ReferencePoint {
  double position = 0.0;
  double velocity = 0.0;
};

/// Setpoint schedule of a mission. Throws std::out_of_range outside [0, duration].
ReferencePoint reference_at(const Mission& mission, double t);

/// Sawtooth in [-amp, amp] with the configured frequency; zero when either is zero.
double disturbance_at(const NoiseSpec& noise, double t);

struct Sample {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double r = 0.0;
  double e = 0.0;  // r - x
  MissionMode mode = MissionMode::Hold;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const Sample& operator[](std::size_t k) const { return samples[k]; }
};

/// Number of samples for a run: floor(min(duration, t_max) / dt) + 1.
std::size_t sample_count(const PlantModel& plant, const Mission& mission);

/// Simulates one configuration. Sensor noise uses plant.noise.seed.
Trajectory simulate(const PlantModel& plant, const PidConfig& pid, const Mission& mission);

/// Simulates many configurations in lock step on the active kernel. Lane j
/// uses seeds[j] for its sensor noise; results equal per-config simulate()
/// calls with the same seed, bit for bit.
std::vector<Trajectory> simulate_batch(const PlantModel& plant, const Mission& mission,
                                       std::span<const PidConfig> pids,
                                       std::span<const std::uint64_t> seeds);

/// CSV with header `t,x,v,r,e,mode`, 9 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace pidlab
