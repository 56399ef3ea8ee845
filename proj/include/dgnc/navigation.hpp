#pragma once

#include "dgnc/common.hpp"
#include "dgnc/dynamics.hpp"
#include "dgnc/sensors.hpp"

namespace dgnc {

/// Mean and covariance delivered to the controller each step.
struct EstimateState {
  StateVector xi_hat;
  MatX sigma = MatX::Zero(12, 12);
};

namespace kf {

/// Sigma_minus = A Sigma A^T + G P G^T (non-additive noise, discrete form).
inline MatX predict_covariance(const MatX& sigma, const MatX& a, const MatX& g,
                               const MatX& p) {
  MatX out = a * sigma * a.transpose() + g * p * g.transpose();
  symmetrize(out);
  return out;
}

struct UpdateResult {
  VecX x;
  MatX sigma;
  VecX innovation;
};

/// Joseph-form measurement update with non-additive noise y = h(x) + V n.
/// An exactly-zero innovation covariance (no prior, no noise) is the
/// noise-free limit and yields K = 0 rather than an error.
inline UpdateResult joseph_update(const VecX& x_minus, const MatX& sigma_minus,
                                  const VecX& y, const VecX& h_at_mean,
                                  const MatX& h, const MatX& v, const MatX& p) {
  MatX vpv = v * p * v.transpose();
  symmetrize(vpv);
  MatX s = h * sigma_minus * h.transpose() + vpv;
  symmetrize(s);

  UpdateResult res;
  res.innovation = y - h_at_mean;
  if (s.cwiseAbs().maxCoeff() == 0.0) {
    res.x = x_minus;
    res.sigma = sigma_minus;
    return res;
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(s);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw SingularInnovation("innovation covariance condition number > 1e12");

  const MatX k = sigma_minus * h.transpose() * s.inverse();
  res.x = x_minus + k * res.innovation;
  const MatX ikh = MatX::Identity(sigma_minus.rows(), sigma_minus.cols()) -
                   k * h;
  res.sigma = ikh * sigma_minus * ikh.transpose() + k * vpv * k.transpose();
  symmetrize(res.sigma);
  return res;
}

}  // namespace kf

/// Shared plant/filter models for the spacecraft EKF.
struct ControlModels {
  GravityProvider gravity_low;
  SpacecraftParams spacecraft;
  AsteroidRotation rotation;
  FeaturePointSet features;
  CameraParams camera;
  MatX g = MatX::Zero(12, kNoiseDim);  // disturbance matrix G_t
  MatX p = MatX::Zero(kNoiseDim, kNoiseDim);  // noise covariance P
};

/// Mean by RK4 over f_hat; covariance by the discrete A_t of the caller.
inline EstimateState ekf_predict(const EstimateState& est,
                                 const ControlVector& u, double dt,
                                 const ControlModels& models, const MatX& a_t,
                                 double t) {
  EstimateState out;
  out.xi_hat = rk4_step(est.xi_hat, u, dt, models.gravity_low,
                        models.spacecraft, models.rotation, t);
  out.sigma = kf::predict_covariance(est.sigma, a_t, models.g, models.p);
  return out;
}

inline EstimateState ekf_update(const EstimateState& est_minus, const VecX& y,
                                const MatX& h, const MatX& v, const MatX& p,
                                const VecX& h_at_mean) {
  const auto res = kf::joseph_update(est_minus.xi_hat.to_vector(),
                                     est_minus.sigma, y, h_at_mean, h, v, p);
  EstimateState out;
  out.xi_hat = StateVector::from_vector(res.x);
  out.sigma = res.sigma;
  return out;
}

/// One filter cycle: predict with the previous step's linearization, update
/// at the predicted state, then refresh A_t/B_t at the posterior. The
/// returned snapshot is the single evaluation shared with the controller and
/// with the next predict.
inline EstimateState ekf_step(const EstimateState& est, const ControlVector& u,
                              const VecX& y, double dt,
                              const ControlModels& models,
                              const LinearizedSystem& prev, double t_now,
                              LinearizedSystem& snapshot) {
  EstimateState minus = ekf_predict(est, u, dt, models, prev.a, t_now - dt);

  MatX h, v;
  measurement_jacobians(minus.xi_hat, models.features, models.camera,
                        models.rotation, t_now, h, v);
  const VecX h0 = measure(minus.xi_hat, VecX::Zero(kNoiseDim), models.features,
                          models.camera, models.rotation, t_now);
  EstimateState plus = ekf_update(minus, y, h, v, models.p, h0);

  Eigen::Matrix<double, 12, 12> a_c;
  Eigen::Matrix<double, 12, 6> b_c;
  linearize_dynamics(plus.xi_hat, models.gravity_low, models.spacecraft,
                     models.rotation, t_now, a_c, b_c);
  snapshot.dt = dt;
  discretize(a_c, b_c, dt, snapshot.a, snapshot.b);
  snapshot.g = models.g;
  snapshot.h = h;
  snapshot.v = v;
  return plus;
}

/// Snapshot at the initial posterior, before any predict has run.
inline LinearizedSystem initial_snapshot(const EstimateState& est,
                                         const ControlModels& models,
                                         double dt, double t = 0.0) {
  LinearizedSystem sys;
  sys.dt = dt;
  Eigen::Matrix<double, 12, 12> a_c;
  Eigen::Matrix<double, 12, 6> b_c;
  linearize_dynamics(est.xi_hat, models.gravity_low, models.spacecraft,
                     models.rotation, t, a_c, b_c);
  discretize(a_c, b_c, dt, sys.a, sys.b);
  MatX h, v;
  measurement_jacobians(est.xi_hat, models.features, models.camera,
                        models.rotation, t, h, v);
  sys.h = h;
  sys.v = v;
  sys.g = models.g;
  return sys;
}

}  // namespace dgnc
