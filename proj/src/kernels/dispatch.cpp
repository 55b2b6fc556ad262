#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pidlab/kernels.hpp"

namespace pidlab::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("PIDLAB_SIMD")) {
    const std::string want = env;
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(PIDLAB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernel ISA not available: " + std::string(to_string(isa)));
  }
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void reset_isa() { selected().store(static_cast<int>(detect()), std::memory_order_relaxed); }

Rk4StepFn rk4_step(Isa isa) {
#if defined(PIDLAB_HAVE_AVX2)
  if (isa == Isa::Avx2) return &rk4_step_avx2;
#endif
  (void)isa;
  return &rk4_step_scalar;
}

RouthFn routh(Isa isa) {
#if defined(PIDLAB_HAVE_AVX2)
  if (isa == Isa::Avx2) return &routh_avx2;
#endif
  (void)isa;
  return &routh_scalar;
}

}  // namespace pidlab::kernels
