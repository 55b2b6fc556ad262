#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and an AVX2
// variant; the variant is chosen once at runtime from CPUID and can be pinned
// with PIDLAB_SIMD=scalar|avx2 or force_isa(). Variants round identically
// (no FMA, same operation order), so results are bit-identical across ISAs.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pidlab::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
/// Pins the dispatch target; throws std::invalid_argument if unavailable.
void force_isa(Isa isa);
/// Restores CPUID/environment-based selection.
void reset_isa();

struct PlantCoeffs {
  double a1;
  double a2;
};

/// Reference and disturbance at the three RK4 stage times t, t + dt/2, t + dt.
/// Shared by every lane of a batch.
struct StageInputs {
  double r[3];
  double rd[3];
  double dist[3];
};

struct LaneGains {
  const double* kp;
  const double* ki;
  const double* kd;
};

/// Augmented state (position, velocity, integral of measured error), SoA.
struct LaneState {
  double* x;
  double* v;
  double* z;
};

/// One RK4 step of x'' + a2 x' + a1 x = u for `lanes` independent gain sets.
/// noise[j] is the sensor noise on lane j's measured position, held over the step.
using Rk4StepFn = void (*)(const PlantCoeffs& plant, double dt, const StageInputs& in,
                           LaneGains gains, const double* noise, LaneState state,
                           std::size_t lanes);

/// out[j] = 1 iff the Routh-Hurwitz conditions hold for element j.
using RouthFn = void (*)(const double* kp, const double* ki, const double* kd,
                         const double* a1, const double* a2, std::uint8_t* out,
                         std::size_t n);

void rk4_step_scalar(const PlantCoeffs& plant, double dt, const StageInputs& in,
                     LaneGains gains, const double* noise, LaneState state, std::size_t lanes);
void routh_scalar(const double* kp, const double* ki, const double* kd, const double* a1,
                  const double* a2, std::uint8_t* out, std::size_t n);

#if defined(PIDLAB_HAVE_AVX2)
void rk4_step_avx2(const PlantCoeffs& plant, double dt, const StageInputs& in,
                   LaneGains gains, const double* noise, LaneState state, std::size_t lanes);
void routh_avx2(const double* kp, const double* ki, const double* kd, const double* a1,
                const double* a2, std::uint8_t* out, std::size_t n);
#endif

Rk4StepFn rk4_step(Isa isa);
RouthFn routh(Isa isa);

inline Rk4StepFn rk4_step() { return rk4_step(active_isa()); }
inline RouthFn routh() { return routh(active_isa()); }

}  // namespace pidlab::kernels
