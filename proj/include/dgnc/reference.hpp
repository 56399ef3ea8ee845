#pragma once

#include <cmath>
#include <vector>

#include "dgnc/common.hpp"
#include "dgnc/dynamics.hpp"
#include "dgnc/frames.hpp"
#include "dgnc/mpc.hpp"
#include "dgnc/scenario.hpp"
#include "dgnc/sensors.hpp"

namespace dgnc {

/// Constant-rate descent from r0 to rend, then hover; length steps+1.
inline std::vector<Vec3> build_position_reference(const Vec3& r0,
                                                  const Vec3& rend,
                                                  double rate_km_s, double dt,
                                                  int steps) {
  const double dist = (rend - r0).norm();
  const int n_descent =
      dist > 0.0 ? static_cast<int>(std::ceil(dist / (rate_km_s * dt))) : 0;
  std::vector<Vec3> out;
  out.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    if (n_descent == 0 || k >= n_descent) {
      out.push_back(rend);
    } else {
      out.push_back(r0 + (static_cast<double>(k) / n_descent) * (rend - r0));
    }
  }
  return out;
}

/// Attitude that centers the camera on the mean feature direction: the
/// boresight (-d_b toward +e3) is aligned with -d_a^avg and the second body
/// axis comes from projecting asteroid +x orthogonally to the boresight.
inline EulerAngles attitude_reference(const Vec3& r_ref,
                                      const FeaturePointSet& features,
                                      double t, double spin_rate,
                                      const EulerAngles& branch_prev) {
  const Vec3 d_avg = r_ref - features.centroid();
  if (d_avg.norm() < 1e-12)
    throw DomainError("reference position coincides with feature centroid");
  const Vec3 z_body = (-d_avg).normalized();
  Vec3 x_body = Vec3::UnitX() - Vec3::UnitX().dot(z_body) * z_body;
  if (x_body.norm() < 1e-9) {
    x_body = Vec3::UnitY() - Vec3::UnitY().dot(z_body) * z_body;
  }
  x_body.normalize();
  const Vec3 y_body = z_body.cross(x_body);

  Mat3 r_ab;  // body axes expressed in the asteroid frame
  r_ab.col(0) = x_body;
  r_ab.col(1) = y_body;
  r_ab.col(2) = z_body;
  const Mat3 r_ba = r_ab.transpose();
  const Mat3 r_bi = r_ba * rotation_i_to_a(t, spin_rate).transpose();
  return euler_from_rotation(r_bi, branch_prev);
}

/// Full reference: xi[k] = [r_ref, 0, Theta_ref, 0] for k = 0..steps and the
/// equilibrium inputs of the discretized linearization at each reference
/// state, u[k] for k = 0..steps-1.
struct ReferenceTrajectory {
  std::vector<StateVector> xi;
  std::vector<VecX> u;
};

inline ReferenceTrajectory build_reference_trajectory(
    const ScenarioConfig& cfg, const GravityProvider& gravity_low) {
  const SpacecraftParams sc(cfg.inertia_kg_km2);
  const AsteroidRotation rot{cfg.spin_rate_rad_s};
  const auto positions = build_position_reference(
      cfg.r0_ref_km, cfg.rend_ref_km, cfg.descent_rate_km_s, cfg.dt_s,
      cfg.steps);

  ReferenceTrajectory ref;
  ref.xi.reserve(positions.size());
  ref.u.reserve(cfg.steps);
  EulerAngles branch = EulerAngles::from_vec(cfg.branch_seed_rad);
  for (int k = 0; k <= cfg.steps; ++k) {
    const double t = k * cfg.dt_s;
    const EulerAngles theta =
        attitude_reference(positions[static_cast<size_t>(k)], cfg.features, t,
                           cfg.spin_rate_rad_s, branch);
    branch = theta;
    StateVector s;
    s.r_a = positions[static_cast<size_t>(k)];
    s.theta = theta.vec();
    ref.xi.push_back(s);
  }
  for (int k = 0; k < cfg.steps; ++k) {
    const double t = k * cfg.dt_s;
    Eigen::Matrix<double, 12, 12> a_c;
    Eigen::Matrix<double, 12, 6> b_c;
    linearize_dynamics(ref.xi[static_cast<size_t>(k)], gravity_low, sc, rot, t,
                       a_c, b_c);
    MatX a_d, b_d;
    discretize(a_c, b_c, cfg.dt_s, a_d, b_d);
    ref.u.push_back(equilibrium_control(
        a_d, b_d, ref.xi[static_cast<size_t>(k)].to_vector()));
  }
  return ref;
}

}  // namespace dgnc
