#pragma once

// Routh-Hurwitz stability of the closed loop
//   s^3 + (a2 + kd) s^2 + (a1 + kp) s + ki
// plus an independent check through the roots themselves.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "pidlab/plant.hpp"

namespace pidlab {

/// kp + a1 > 0, kd + a2 > 0, ki > 0 and (kp + a1)(kd + a2) > ki, all strict.
bool routh_stable(const PidConfig& pid, double a1, double a2);

/// Coefficients {c2, c1, c0} of the monic closed-loop cubic.
std::array<double, 3> characteristic_polynomial(const PidConfig& pid, double a1, double a2);

/// Companion-matrix eigenvalues, each polished by one Newton step.
std::array<std::complex<double>, 3> characteristic_roots(const PidConfig& pid, double a1,
                                                         double a2);

/// True iff every root has real part < -1e-9.
bool roots_stable(const PidConfig& pid, double a1, double a2);

struct BoundaryPoint {
  double kd;
  double ki;
};

/// ki = (p + a1)(kd + a2) on the plane kp = p. std::nullopt when p + a1 <= 0:
/// no ki makes any point of that plane stable.
std::optional<std::vector<BoundaryPoint>> theoretical_boundary(double p, double a1, double a2,
                                                               std::span<const double> kd_values);

}  // namespace pidlab
