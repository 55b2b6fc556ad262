// Compiled with -mavx2 only (no -mfma): every product and sum rounds exactly
// like the scalar reference.

#include <immintrin.h>

#include "pidlab/kernels.hpp"
#include "pidlab/plant.hpp"

namespace pidlab::kernels {

namespace {

struct Deriv4 {
  __m256d dx, dv, dz;
};

inline Deriv4 closed_loop(__m256d x, __m256d v, __m256d z, __m256d kp, __m256d ki, __m256d kd,
                          __m256d a1, __m256d a2, double r, double rd, double dist,
                          __m256d noise) {
  const __m256d measured = _mm256_add_pd(x, noise);
  const __m256d err = _mm256_sub_pd(_mm256_set1_pd(r), measured);
  __m256d u = _mm256_mul_pd(kp, err);
  u = _mm256_add_pd(u, _mm256_mul_pd(ki, z));
  u = _mm256_add_pd(u, _mm256_mul_pd(kd, _mm256_sub_pd(_mm256_set1_pd(rd), v)));
  u = _mm256_add_pd(u, _mm256_set1_pd(dist));
  const __m256d acc =
      _mm256_sub_pd(_mm256_sub_pd(u, _mm256_mul_pd(a2, v)), _mm256_mul_pd(a1, x));
  return {v, acc, err};
}

inline __m256d axpy(__m256d base, __m256d h, __m256d slope) {
  return _mm256_add_pd(base, _mm256_mul_pd(h, slope));
}

inline __m256d rk4_sum(__m256d k1, __m256d k2, __m256d k3, __m256d k4) {
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d s = _mm256_add_pd(k1, _mm256_mul_pd(two, k2));
  s = _mm256_add_pd(s, _mm256_mul_pd(two, k3));
  return _mm256_add_pd(s, k4);
}

inline __m256d saturate(__m256d value) {
  const __m256d lo = _mm256_max_pd(value, _mm256_set1_pd(-kSaturation));
  return _mm256_min_pd(lo, _mm256_set1_pd(kSaturation));
}

}  // namespace

void rk4_step_avx2(const PlantCoeffs& plant, double dt, const StageInputs& in,
                   LaneGains gains, const double* noise, LaneState state, std::size_t lanes) {
  const __m256d a1 = _mm256_set1_pd(plant.a1);
  const __m256d a2 = _mm256_set1_pd(plant.a2);
  const __m256d h = _mm256_set1_pd(0.5 * dt);
  const __m256d full = _mm256_set1_pd(dt);
  const __m256d sixth = _mm256_set1_pd(dt / 6.0);

  std::size_t j = 0;
  for (; j + 4 <= lanes; j += 4) {
    const __m256d kp = _mm256_loadu_pd(gains.kp + j);
    const __m256d ki = _mm256_loadu_pd(gains.ki + j);
    const __m256d kd = _mm256_loadu_pd(gains.kd + j);
    const __m256d nz = _mm256_loadu_pd(noise + j);
    const __m256d x = _mm256_loadu_pd(state.x + j);
    const __m256d v = _mm256_loadu_pd(state.v + j);
    const __m256d z = _mm256_loadu_pd(state.z + j);

    const Deriv4 k1 =
        closed_loop(x, v, z, kp, ki, kd, a1, a2, in.r[0], in.rd[0], in.dist[0], nz);
    const Deriv4 k2 = closed_loop(axpy(x, h, k1.dx), axpy(v, h, k1.dv), axpy(z, h, k1.dz), kp,
                                  ki, kd, a1, a2, in.r[1], in.rd[1], in.dist[1], nz);
    const Deriv4 k3 = closed_loop(axpy(x, h, k2.dx), axpy(v, h, k2.dv), axpy(z, h, k2.dz), kp,
                                  ki, kd, a1, a2, in.r[1], in.rd[1], in.dist[1], nz);
    const Deriv4 k4 = closed_loop(axpy(x, full, k3.dx), axpy(v, full, k3.dv),
                                  axpy(z, full, k3.dz), kp, ki, kd, a1, a2, in.r[2], in.rd[2],
                                  in.dist[2], nz);

    _mm256_storeu_pd(state.x + j, saturate(axpy(x, sixth, rk4_sum(k1.dx, k2.dx, k3.dx, k4.dx))));
    _mm256_storeu_pd(state.v + j, saturate(axpy(v, sixth, rk4_sum(k1.dv, k2.dv, k3.dv, k4.dv))));
    _mm256_storeu_pd(state.z + j, axpy(z, sixth, rk4_sum(k1.dz, k2.dz, k3.dz, k4.dz)));
  }
  if (j < lanes) {
    rk4_step_scalar(plant, dt, in, LaneGains{gains.kp + j, gains.ki + j, gains.kd + j},
                    noise + j, LaneState{state.x + j, state.v + j, state.z + j}, lanes - j);
  }
}

void routh_avx2(const double* kp, const double* ki, const double* kd, const double* a1,
                const double* a2, std::uint8_t* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d b = _mm256_add_pd(_mm256_loadu_pd(kp + j), _mm256_loadu_pd(a1 + j));
    const __m256d a = _mm256_add_pd(_mm256_loadu_pd(kd + j), _mm256_loadu_pd(a2 + j));
    const __m256d i = _mm256_loadu_pd(ki + j);
    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(b, zero, _CMP_GT_OQ),
                               _mm256_cmp_pd(a, zero, _CMP_GT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(i, zero, _CMP_GT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(_mm256_mul_pd(b, a), i, _CMP_GT_OQ));
    const int mask = _mm256_movemask_pd(ok);
    for (int lane = 0; lane < 4; ++lane) {
      out[j + lane] = static_cast<std::uint8_t>((mask >> lane) & 1);
    }
  }
  if (j < n) {
    routh_scalar(kp + j, ki + j, kd + j, a1 + j, a2 + j, out + j, n - j);
  }
}

}  // namespace pidlab::kernels
