#include "pidlab/kernels.hpp"

#include "pidlab/plant.hpp"

namespace pidlab::kernels {

namespace {

struct Deriv {
  double dx, dv, dz;
};

// Operation order here is the contract the SIMD variants reproduce.
inline Deriv closed_loop(double x, double v, double z, double kp, double ki, double kd,
                         double a1, double a2, double r, double rd, double dist, double noise) {
  const double measured = x + noise;
  const double err = r - measured;
  double u = kp * err;
  u = u + ki * z;
  u = u + kd * (rd - v);
  u = u + dist;
  const double acc = (u - a2 * v) - a1 * x;
  return {v, acc, err};
}

inline double saturate(double value) {
  const double lo = value > -kSaturation ? value : -kSaturation;
  return lo < kSaturation ? lo : kSaturation;
}

}  // namespace

void rk4_step_scalar(const PlantCoeffs& plant, double dt, const StageInputs& in,
                     LaneGains gains, const double* noise, LaneState state, std::size_t lanes) {
  const double half = 0.5 * dt;
  const double sixth = dt / 6.0;
  for (std::size_t j = 0; j < lanes; ++j) {
    const double kp = gains.kp[j], ki = gains.ki[j], kd = gains.kd[j];
    const double nz = noise[j];
    const double x = state.x[j], v = state.v[j], z = state.z[j];

    const Deriv k1 = closed_loop(x, v, z, kp, ki, kd, plant.a1, plant.a2, in.r[0], in.rd[0],
                                 in.dist[0], nz);
    const Deriv k2 = closed_loop(x + half * k1.dx, v + half * k1.dv, z + half * k1.dz, kp, ki,
                                 kd, plant.a1, plant.a2, in.r[1], in.rd[1], in.dist[1], nz);
    const Deriv k3 = closed_loop(x + half * k2.dx, v + half * k2.dv, z + half * k2.dz, kp, ki,
                                 kd, plant.a1, plant.a2, in.r[1], in.rd[1], in.dist[1], nz);
    const Deriv k4 = closed_loop(x + dt * k3.dx, v + dt * k3.dv, z + dt * k3.dz, kp, ki, kd,
                                 plant.a1, plant.a2, in.r[2], in.rd[2], in.dist[2], nz);

    const double sx = ((k1.dx + 2.0 * k2.dx) + 2.0 * k3.dx) + k4.dx;
    const double sv = ((k1.dv + 2.0 * k2.dv) + 2.0 * k3.dv) + k4.dv;
    const double sz = ((k1.dz + 2.0 * k2.dz) + 2.0 * k3.dz) + k4.dz;
    state.x[j] = saturate(x + sixth * sx);
    state.v[j] = saturate(v + sixth * sv);
    state.z[j] = z + sixth * sz;
  }
}

void routh_scalar(const double* kp, const double* ki, const double* kd, const double* a1,
                  const double* a2, std::uint8_t* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double b = kp[j] + a1[j];
    const double a = kd[j] + a2[j];
    out[j] = (b > 0.0) & (a > 0.0) & (ki[j] > 0.0) & (b * a > ki[j]);
  }
}

}  // namespace pidlab::kernels
