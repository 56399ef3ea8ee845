#pragma once

#include <cmath>

#include "dgnc/common.hpp"

namespace dgnc {

/// 321 Euler angles [phi, theta, psi]; psi is the first rotation (inertial ->
/// Euler-1 frame), theta the second, phi the last.
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  Vec3 vec() const { return Vec3(phi, theta, psi); }
  static EulerAngles from_vec(const Vec3& v) { return {v(0), v(1), v(2)}; }
};

inline constexpr double kGimbalGuard = 1e-3;  // rad, guard band on |theta|

/// Asteroid-fixed -> inertial rotation at time t for spin rate n_i about +z.
inline Mat3 rotation_i_to_a(double t, double spin_rate) {
  const double c = std::cos(spin_rate * t);
  const double s = std::sin(spin_rate * t);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

inline Mat3 rot_1i(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

inline Mat3 rot_21(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

inline Mat3 rot_b2(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

/// Inertial -> body rotation, R_bi = R_b2(phi) R_21(theta) R_1i(psi).
inline Mat3 rotation_b_from_i(const EulerAngles& e) {
  return rot_b2(e.phi) * rot_21(e.theta) * rot_1i(e.psi);
}

/// Asteroid-fixed -> body rotation, R_ba = R_bi R_ia.
inline Mat3 rotation_b_from_a(const EulerAngles& e, double t,
                              double spin_rate) {
  return rotation_b_from_i(e) * rotation_i_to_a(t, spin_rate);
}

/// Body-rate kinematic matrix B = [R_21 R_1i e1, R_1i e2, e3], so that
/// Theta_dot = B^-1 omega_b. Non-standard column layout kept verbatim;
/// det B = cos(theta) cos^2(psi) + sin^2(psi).
inline Mat3 b_matrix(const EulerAngles& e) {
  Mat3 b;
  b.col(0) = rot_21(e.theta) * rot_1i(e.psi).col(0);
  b.col(1) = rot_1i(e.psi).col(1);
  b.col(2) = Vec3::UnitZ();
  return b;
}

inline Mat3 b_matrix_inverse(const EulerAngles& e) {
  const Mat3 b = b_matrix(e);
  const double det = b.determinant();
  if (std::abs(det) < 1e-8)
    throw SingularKinematics("b_matrix singular near gimbal lock, |det| = " +
                             std::to_string(std::abs(det)));
  return b.inverse();
}

/// 321 extraction from R_bi = R_b2 R_21 R_1i. theta is taken on the principal
/// branch (-pi/2, pi/2); phi and psi are unwrapped to the 2*pi branch nearest
/// `branch_seed` so a trajectory of extractions stays continuous.
inline EulerAngles euler_from_rotation(const Mat3& r_bi,
                                       const EulerAngles& branch_seed) {
  const double s_theta = r_bi(0, 2);
  if (std::abs(s_theta) >= 1.0 - 1e-9)
    throw GimbalLock("pitch magnitude at gimbal singularity");
  const double theta = std::asin(s_theta);
  if (std::abs(theta) >= M_PI / 2 - kGimbalGuard)
    throw GimbalLock("pitch inside gimbal guard band");
  double psi = std::atan2(-r_bi(0, 1), r_bi(0, 0));
  double phi = std::atan2(-r_bi(1, 2), r_bi(2, 2));

  const auto unwrap = [](double angle, double seed) {
    const double two_pi = 2.0 * M_PI;
    return angle + two_pi * std::round((seed - angle) / two_pi);
  };
  phi = unwrap(phi, branch_seed.phi);
  psi = unwrap(psi, branch_seed.psi);
  return {phi, theta, psi};
}

}  // namespace dgnc
