#include "pidlab/stability.hpp"

#include <Eigen/Eigenvalues>

namespace pidlab {

bool routh_stable(const PidConfig& pid, double a1, double a2) {
  const double b = pid.kp + a1;
  const double a = pid.kd + a2;
  return b > 0.0 && a > 0.0 && pid.ki > 0.0 && b * a > pid.ki;
}

std::array<double, 3> characteristic_polynomial(const PidConfig& pid, double a1, double a2) {
  return {a2 + pid.kd, a1 + pid.kp, pid.ki};
}

std::array<std::complex<double>, 3> characteristic_roots(const PidConfig& pid, double a1,
                                                         double a2) {
  const auto [c2, c1, c0] = characteristic_polynomial(pid, a1, a2);

  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -c0;
  companion(1, 2) = -c1;
  companion(2, 2) = -c2;

  Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, /*computeEigenvectors=*/false);
  const Eigen::Vector3cd eig = solver.eigenvalues();

  std::array<std::complex<double>, 3> roots;
  for (int k = 0; k < 3; ++k) {
    std::complex<double> s = eig[k];
    const std::complex<double> p = ((s + c2) * s + c1) * s + c0;
    const std::complex<double> dp = (3.0 * s + 2.0 * c2) * s + c1;
    // A vanishing derivative means a multiple root; Newton would not help there.
    if (std::abs(dp) > 1e-12) {
      const std::complex<double> polished = s - p / dp;
      const std::complex<double> pp = ((polished + c2) * polished + c1) * polished + c0;
      if (std::abs(pp) <= std::abs(p)) s = polished;
    }
    roots[k] = s;
  }
  return roots;
}

bool roots_stable(const PidConfig& pid, double a1, double a2) {
  for (const auto& root : characteristic_roots(pid, a1, a2)) {
    if (!(root.real() < -1e-9)) return false;
  }
  return true;
}

std::optional<std::vector<BoundaryPoint>> theoretical_boundary(double p, double a1, double a2,
                                                               std::span<const double> kd_values) {
  const double b = p + a1;
  if (!(b > 0.0)) return std::nullopt;
  std::vector<BoundaryPoint> line;
  line.reserve(kd_values.size());
  for (double d : kd_values) line.push_back({d, b * (d + a2)});
  return line;
}

}  // namespace pidlab
