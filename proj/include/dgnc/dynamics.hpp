#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "dgnc/common.hpp"
#include "dgnc/frames.hpp"
#include "dgnc/gravity.hpp"

namespace dgnc {

/// 12-component spacecraft state [r_a, v_a, Theta, omega_b].
struct StateVector {
  Vec3 r_a = Vec3::Zero();      // km, asteroid-fixed
  Vec3 v_a = Vec3::Zero();      // km/s, asteroid-fixed
  Vec3 theta = Vec3::Zero();    // rad, 321 Euler angles [phi, theta, psi]
  Vec3 omega_b = Vec3::Zero();  // rad/s, body rates

  EulerAngles euler() const { return EulerAngles::from_vec(theta); }

  Eigen::Matrix<double, 12, 1> to_vector() const {
    Eigen::Matrix<double, 12, 1> x;
    x << r_a, v_a, theta, omega_b;
    return x;
  }
  static StateVector from_vector(const Eigen::Matrix<double, 12, 1>& x) {
    StateVector s;
    s.r_a = x.segment<3>(0);
    s.v_a = x.segment<3>(3);
    s.theta = x.segment<3>(6);
    s.omega_b = x.segment<3>(9);
    return s;
  }
  bool finite() const { return to_vector().allFinite(); }
};

/// [u (km/s^2, inertial translational force per unit mass), M (moments)].
struct ControlVector {
  Vec3 u = Vec3::Zero();
  Vec3 moment = Vec3::Zero();

  Eigen::Matrix<double, 6, 1> to_vector() const {
    Eigen::Matrix<double, 6, 1> v;
    v << u, moment;
    return v;
  }
  static ControlVector from_vector(const Eigen::Matrix<double, 6, 1>& v) {
    ControlVector c;
    c.u = v.segment<3>(0);
    c.moment = v.segment<3>(3);
    return c;
  }
};

struct SpacecraftParams {
  Mat3 inertia = Mat3::Identity();
  Mat3 inertia_inv = Mat3::Identity();

  SpacecraftParams() = default;
  explicit SpacecraftParams(const Mat3& j) : inertia(j) {
    if (!j.isApprox(j.transpose(), 1e-12))
      throw DomainError("inertia matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(j);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw DomainError("inertia matrix must be positive definite");
    inertia_inv = j.inverse();
  }
};

struct AsteroidRotation {
  double spin_rate = 0.0;  // rad/s, about inertial +z

  Vec3 omega_vec() const { return Vec3(0, 0, spin_rate); }
};

/// Right-hand side of the 6-DOF plant. Control u is commanded in the inertial
/// frame and rotated into the asteroid-fixed frame here; gravity providers
/// already evaluate in the asteroid-fixed frame.
inline StateVector plant_derivative(const StateVector& xi,
                                    const ControlVector& u,
                                    const GravityProvider& gravity,
                                    const SpacecraftParams& params,
                                    const AsteroidRotation& rotation,
                                    double t) {
  const Vec3 omega_ast = rotation.omega_vec();
  const Mat3 r_ai = rotation_i_to_a(t, rotation.spin_rate).transpose();
  const Vec3 grav = gravity.acceleration(xi.r_a);

  StateVector d;
  d.r_a = xi.v_a;
  d.v_a = r_ai * u.u + grav - 2.0 * omega_ast.cross(xi.v_a) -
          omega_ast.cross(omega_ast.cross(xi.r_a));
  d.theta = b_matrix_inverse(xi.euler()) * xi.omega_b;
  d.omega_b = params.inertia_inv *
              (u.moment - xi.omega_b.cross(params.inertia * xi.omega_b));
  return d;
}

/// Classical RK4 step with zero-order-hold control.
inline StateVector rk4_step(const StateVector& xi, const ControlVector& u,
                            double dt, const GravityProvider& gravity,
                            const SpacecraftParams& params,
                            const AsteroidRotation& rotation, double t) {
  if (!(dt > 0.0)) throw DomainError("rk4_step requires dt > 0");
  const auto f = [&](const StateVector& x, double time) {
    return plant_derivative(x, u, gravity, params, rotation, time);
  };
  const auto add = [](const StateVector& x, const StateVector& d, double h) {
    return StateVector::from_vector(x.to_vector() + h * d.to_vector());
  };
  const StateVector k1 = f(xi, t);
  const StateVector k2 = f(add(xi, k1, dt / 2), t + dt / 2);
  const StateVector k3 = f(add(xi, k2, dt / 2), t + dt / 2);
  const StateVector k4 = f(add(xi, k3, dt), t + dt);
  Eigen::Matrix<double, 12, 1> next =
      xi.to_vector() + (dt / 6.0) * (k1.to_vector() + 2 * k2.to_vector() +
                                     2 * k3.to_vector() + k4.to_vector());
  return StateVector::from_vector(next);
}

/// Continuous-time Jacobians of f_hat at (xi_hat, u). Translational coupling
/// and the gyroscopic term are analytic; the gravity gradient (step 1e-6 km)
/// and the Euler-kinematics block (step 1e-6 rad) use central differences.
inline void linearize_dynamics(const StateVector& xi_hat,
                               const GravityProvider& gravity_low,
                               const SpacecraftParams& params,
                               const AsteroidRotation& rotation, double t,
                               Eigen::Matrix<double, 12, 12>& a_c,
                               Eigen::Matrix<double, 12, 6>& b_c) {
  const Vec3 omega_ast = rotation.omega_vec();
  const Mat3 ox = skew(omega_ast);
  a_c.setZero();
  b_c.setZero();

  a_c.block<3, 3>(0, 3) = Mat3::Identity();

  Mat3 grav_grad;
  const double h_r = 1e-6;  // km
  for (int j = 0; j < 3; ++j) {
    Vec3 rp = xi_hat.r_a, rm = xi_hat.r_a;
    rp(j) += h_r;
    rm(j) -= h_r;
    grav_grad.col(j) =
        (gravity_low.acceleration(rp) - gravity_low.acceleration(rm)) /
        (2.0 * h_r);
  }
  a_c.block<3, 3>(3, 0) = grav_grad - ox * ox;
  a_c.block<3, 3>(3, 3) = -2.0 * ox;

  const double h_th = 1e-6;  // rad
  for (int j = 0; j < 3; ++j) {
    Vec3 tp = xi_hat.theta, tm = xi_hat.theta;
    tp(j) += h_th;
    tm(j) -= h_th;
    const Vec3 dp = b_matrix_inverse(EulerAngles::from_vec(tp)) * xi_hat.omega_b;
    const Vec3 dm = b_matrix_inverse(EulerAngles::from_vec(tm)) * xi_hat.omega_b;
    a_c.block<3, 1>(6, 6 + j) = (dp - dm) / (2.0 * h_th);
  }
  a_c.block<3, 3>(6, 9) = b_matrix_inverse(xi_hat.euler());

  const Vec3 jw = params.inertia * xi_hat.omega_b;
  a_c.block<3, 3>(9, 9) =
      params.inertia_inv * (skew(jw) - skew(xi_hat.omega_b) * params.inertia);

  b_c.block<3, 3>(3, 0) = rotation_i_to_a(t, rotation.spin_rate).transpose();
  b_c.block<3, 3>(9, 3) = params.inertia_inv;
}

/// Zero-order-hold discretization via the augmented matrix exponential.
inline void discretize(const MatX& a_c, const MatX& b_c, double dt, MatX& a_d,
                       MatX& b_d) {
  if (!(dt > 0.0)) throw DomainError("discretize requires dt > 0");
  const int n = static_cast<int>(a_c.rows());
  const int m = static_cast<int>(b_c.cols());
  MatX aug = MatX::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a_c;
  aug.topRightCorner(n, m) = b_c;
  const MatX phi = (aug * dt).exp();
  a_d = phi.topLeftCorner(n, n);
  b_d = phi.topRightCorner(n, m);
}

/// Per-step linearized stochastic system (Eqs. A_t, B_t, G_t, H_t, V_t).
struct LinearizedSystem {
  MatX a;  // 12x12 discrete
  MatX b;  // 12x6 discrete
  MatX g;  // 12x16 disturbance
  MatX h;  // 15x12 measurement
  MatX v;  // 15x16 measurement noise
  double dt = 0.0;
};

}  // namespace dgnc
