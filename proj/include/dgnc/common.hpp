#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dgnc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Error taxonomy shared across modules. Each maps to one failure mode of a
// documented operation contract.
struct SingularKinematics : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GravityDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateProjection : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoVisibleFeature : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularInnovation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotStabilizable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankDeficientB : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GimbalLock : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cross-product (skew-symmetric) matrix: skew(a)*b == a x b.
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return s;
}

/// Symmetrize in place; covariance updates call this after every step.
inline void symmetrize(MatX& m) { m = 0.5 * (m + m.transpose()).eval(); }

/// Rank of a symmetric PSD matrix by eigenvalue cutoff (relative 1e-12).
inline int psd_rank(const MatX& m) {
  if (m.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<MatX> es(m);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (lmax <= 0.0) return 0;
  const double cut = 1e-12 * lmax;
  int r = 0;
  for (int i = 0; i < m.rows(); ++i)
    if (es.eigenvalues()(i) > cut) ++r;
  return r;
}

/// Largest |eigenvalue| of a (generally non-symmetric) square matrix.
inline double spectral_radius(const MatX& m) {
  Eigen::EigenSolver<MatX> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace dgnc
