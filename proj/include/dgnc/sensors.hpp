#pragma once

#include <array>
#include <cmath>

#include "dgnc/common.hpp"
#include "dgnc/dynamics.hpp"
#include "dgnc/frames.hpp"

namespace dgnc {

inline constexpr int kNumFeatures = 4;
inline constexpr int kMeasurementDim = 15;  // 4 ranges + 4 pixel pairs + rates
inline constexpr int kNoiseDim = 16;        // N_1..N_4 (3 each), N_c, N_b (3)

/// Known surface markers in the asteroid-fixed frame.
struct FeaturePointSet {
  std::array<Vec3, kNumFeatures> points;

  const Vec3& operator[](int k) const { return points[static_cast<size_t>(k)]; }

  Vec3 centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& p : points) c += p;
    return c / kNumFeatures;
  }
};

struct CameraParams {
  double focal_length = 1.0;  // image-plane scale, constant over a leg
};

/// Slices of the stacked 16-dim noise vector n = [N_1..N_4, N_c, N_b].
inline Vec3 noise_feature(const VecX& n, int k) { return n.segment<3>(3 * k); }
inline double noise_camera(const VecX& n) { return n(12); }
inline Vec3 noise_rates(const VecX& n) { return n.segment<3>(13); }

/// d_b^k = R_ba (r_a - p_a^k).
inline Vec3 relative_vector_body(const Vec3& r_a, const Vec3& p_a_k,
                                 const Mat3& r_ba) {
  return r_ba * (r_a - p_a_k);
}

/// 1 - (-d_b/|d_b|) . e3: zero when the feature sits on the +z boresight,
/// 2 when directly behind.
inline double misalignment_gain(const Vec3& d_b) {
  const double n = d_b.norm();
  if (n <= 0.0) throw DomainError("misalignment gain undefined at d_b = 0");
  return 1.0 - (-d_b / n).dot(Vec3::UnitZ());
}

inline Vec3 corrupted_vector(const Vec3& d_b, const Vec3& n_k) {
  return d_b + misalignment_gain(d_b) * n_k;
}

inline double lidar_range(const Vec3& d_b_hat) { return d_b_hat.norm(); }

/// Pinhole projection c = (f/(e3 . d) + N_c) [d_1, d_2].
inline Vec2 camera_pixels(const Vec3& d_b_hat, double focal_length,
                          double n_c) {
  const double depth = d_b_hat.z();
  if (std::abs(depth) < 1e-9)
    throw DegenerateProjection("feature on the camera plane (z ~ 0)");
  return (focal_length / depth + n_c) * d_b_hat.head<2>();
}

/// Full measurement stack y = [d^1..d^4, c^1..c^4, omega_hat].
inline VecX measure(const StateVector& xi, const VecX& noise,
                    const FeaturePointSet& features, const CameraParams& cam,
                    const AsteroidRotation& rotation, double t) {
  const Mat3 r_ba = rotation_b_from_a(xi.euler(), t, rotation.spin_rate);
  VecX y(kMeasurementDim);
  for (int k = 0; k < kNumFeatures; ++k) {
    const Vec3 d_b = relative_vector_body(xi.r_a, features[k], r_ba);
    const Vec3 d_hat = corrupted_vector(d_b, noise_feature(noise, k));
    y(k) = lidar_range(d_hat);
    y.segment<2>(4 + 2 * k) =
        camera_pixels(d_hat, cam.focal_length, noise_camera(noise));
  }
  y.segment<3>(12) = xi.omega_b + noise_rates(noise);
  return y;
}

/// H_t = dh/dxi and V_t = dh/dn at n = 0, by central differences with
/// per-channel relative steps so H, V stay exactly consistent with measure().
inline void measurement_jacobians(const StateVector& xi_hat,
                                  const FeaturePointSet& features,
                                  const CameraParams& cam,
                                  const AsteroidRotation& rotation, double t,
                                  MatX& h, MatX& v) {
  const VecX zero_noise = VecX::Zero(kNoiseDim);
  h.resize(kMeasurementDim, 12);
  v.resize(kMeasurementDim, kNoiseDim);

  Eigen::Matrix<double, 12, 1> x0 = xi_hat.to_vector();
  for (int j = 0; j < 12; ++j) {
    const double step = 3e-7 * std::max(1.0, std::abs(x0(j)));
    auto xp = x0, xm = x0;
    xp(j) += step;
    xm(j) -= step;
    const VecX yp = measure(StateVector::from_vector(xp), zero_noise, features,
                            cam, rotation, t);
    const VecX ym = measure(StateVector::from_vector(xm), zero_noise, features,
                            cam, rotation, t);
    h.col(j) = (yp - ym) / (2.0 * step);
  }
  for (int j = 0; j < kNoiseDim; ++j) {
    const double step = 1e-6;
    VecX np = zero_noise, nm = zero_noise;
    np(j) += step;
    nm(j) -= step;
    const VecX yp = measure(xi_hat, np, features, cam, rotation, t);
    const VecX ym = measure(xi_hat, nm, features, cam, rotation, t);
    v.col(j) = (yp - ym) / (2.0 * step);
  }
}

/// Pick the feature best aligned with the +z boresight (ties to the lowest
/// index) and set f_len to its depth, so its noise-free pixels equal its
/// transverse offset scale.
inline double init_focal_length(const StateVector& xi_0,
                                const FeaturePointSet& features,
                                const AsteroidRotation& rotation,
                                double t = 0.0) {
  const Mat3 r_ba = rotation_b_from_a(xi_0.euler(), t, rotation.spin_rate);
  int best = -1;
  double best_alignment = 0.0;
  for (int k = 0; k < kNumFeatures; ++k) {
    const Vec3 d_b = relative_vector_body(xi_0.r_a, features[k], r_ba);
    const double alignment = (-d_b.normalized()).dot(Vec3::UnitZ());
    if (alignment > best_alignment + 1e-15) {
      best_alignment = alignment;
      best = k;
    }
  }
  if (best < 0 || best_alignment <= 0.0)
    throw NoVisibleFeature("no feature ahead of the camera boresight");
  const Vec3 d_b = relative_vector_body(xi_0.r_a, features[best], r_ba);
  return std::abs(d_b.z());
}

}  // namespace dgnc
