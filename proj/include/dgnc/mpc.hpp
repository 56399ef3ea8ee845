#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dgnc/common.hpp"
#include "dgnc/navigation.hpp"
#include "dgnc/qp.hpp"
#include "dgnc/sensors.hpp"
#include "dgnc/tube.hpp"

namespace dgnc {

/// One-sided or two-sided interval on a state component; infinite ends are
/// skipped when rows are emitted.
struct StateBound {
  int index = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct MpcConfig {
  int horizon = 20;
  double beta = 0.95;
  VecX q_diag;  // state weights (size n)
  VecX r_diag;  // input weights (size m)
  double w_slack = 1e5;
  double s_fov = 20.0;
  std::vector<StateBound> state_bounds;
  double m_trans = 0.002;
  double m_rot = 0.5;
  VecX lqr_q_diag;  // tube gain synthesis weights
  VecX lqr_r_diag;
  int chi2_dof_override = 0;
};

/// Eq. (13) linearized: the infinity-norm pixel bound around the current
/// output h_fov(xi_0) expands into 16 rows over [output; state].
inline std::vector<ConstraintRow> build_fov_rows(const VecX& xi_0,
                                                 const MatX& h_jac,
                                                 const VecX& h_at_xi0,
                                                 double s_fov) {
  std::vector<ConstraintRow> rows;
  rows.reserve(16);
  for (int j = 4; j < 12; ++j) {  // pixel channels of the output stack
    const double h_row_xi0 = h_jac.row(j).dot(xi_0);
    for (const double sign : {1.0, -1.0}) {
      ConstraintRow row;
      row.w_y = VecX::Zero(kMeasurementDim);
      row.w_y(j) = sign;
      row.w_x = VecX::Zero(12);
      row.bound = s_fov + sign * (h_row_xi0 - h_at_xi0(j));
      row.partition = RowPartition::kFov;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Eq. (14) rows: +-selected components against their interval ends.
inline std::vector<ConstraintRow> build_state_rows(
    const std::vector<StateBound>& bounds, int n_x, int n_y) {
  std::vector<ConstraintRow> rows;
  for (const auto& b : bounds) {
    if (b.index < 0 || b.index >= n_x)
      throw DomainError("state bound index out of range");
    if (std::isfinite(b.upper)) {
      ConstraintRow row;
      row.w_y = VecX::Zero(n_y);
      row.w_x = VecX::Zero(n_x);
      row.w_x(b.index) = 1.0;
      row.bound = b.upper;
      row.partition = RowPartition::kState;
      rows.push_back(std::move(row));
    }
    if (std::isfinite(b.lower)) {
      ConstraintRow row;
      row.w_y = VecX::Zero(n_y);
      row.w_x = VecX::Zero(n_x);
      row.w_x(b.index) = -1.0;
      row.bound = -b.lower;
      row.partition = RowPartition::kState;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Symmetric box |xi_i| <= s_xi over the selected components.
inline std::vector<ConstraintRow> build_state_rows(double s_xi,
                                                   const std::vector<int>& sel,
                                                   int n_x, int n_y) {
  std::vector<StateBound> bounds;
  for (int idx : sel) bounds.push_back({idx, -s_xi, s_xi});
  return build_state_rows(bounds, n_x, n_y);
}

/// Input box rows +-u_i <= m over all channels; first three channels carry
/// m_trans, the rest m_rot.
inline std::vector<InputRow> build_input_rows(int m, double m_trans,
                                              double m_rot) {
  std::vector<InputRow> rows;
  for (int j = 0; j < m; ++j) {
    const double bound = (j < 3 || m < 4) ? m_trans : m_rot;
    for (const double sign : {1.0, -1.0}) {
      InputRow row;
      row.m = VecX::Zero(m);
      row.m(j) = sign;
      row.bound = bound;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Least-squares equilibrium input u_ref = (B^T B)^-1 B^T (I - A) xi_ref.
inline VecX equilibrium_control(const MatX& a, const MatX& b,
                                const VecX& xi_ref) {
  const MatX btb = b.transpose() * b;
  Eigen::FullPivLU<MatX> lu(btb);
  if (!lu.isInvertible())
    throw RankDeficientB("B^T B singular in equilibrium control");
  const MatX eye = MatX::Identity(a.rows(), a.cols());
  return lu.solve(b.transpose() * ((eye - a) * xi_ref));
}

struct CondensedQp {
  QpProblem qp;
  int n_inputs = 0;
  int horizon = 0;
  bool has_slack = false;
};

/// Dense condensation of Eq. (21): decision vector [dv_0..dv_{N-1}, eps],
/// with output/state rows at k = 1..N carrying the -eps relaxation and hard
/// input rows at k = 0..N-1.
inline CondensedQp condense(const MatX& a, const MatX& b, const MpcConfig& cfg,
                            const TightenedSet& tightened, const MatX& h_jac,
                            const VecX& xi_hat, const VecX& xi_ref,
                            const VecX& u_ref) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  const int big_n = cfg.horizon;
  const bool has_slack = !tightened.output.empty();
  const int nz = m * big_n + (has_slack ? 1 : 0);

  const VecX dz0 = xi_hat - xi_ref;

  std::vector<MatX> a_pow(big_n + 1);
  a_pow[0] = MatX::Identity(n, n);
  for (int k = 1; k <= big_n; ++k) a_pow[k] = a_pow[k - 1] * a;

  // Prediction stack for dzeta_1..dzeta_N.
  MatX gamma = MatX::Zero(n * big_n, m * big_n);
  MatX f_free = MatX::Zero(n * big_n, n);
  for (int k = 1; k <= big_n; ++k) {
    f_free.middleRows((k - 1) * n, n) = a_pow[k];
    for (int j = 0; j < k; ++j)
      gamma.block((k - 1) * n, j * m, n, m) = a_pow[k - 1 - j] * b;
  }

  VecX q_rep(n * big_n), r_rep(m * big_n);
  for (int k = 0; k < big_n; ++k) {
    q_rep.segment(k * n, n) = cfg.q_diag;
    r_rep.segment(k * m, m) = cfg.r_diag;
  }
  const VecX free_resp = f_free * dz0;

  CondensedQp out;
  out.n_inputs = m;
  out.horizon = big_n;
  out.has_slack = has_slack;
  out.qp.hessian = MatX::Zero(nz, nz);
  out.qp.gradient = VecX::Zero(nz);
  const MatX gtq = gamma.transpose() * q_rep.asDiagonal();
  out.qp.hessian.topLeftCorner(m * big_n, m * big_n) =
      2.0 * (gtq * gamma + MatX(r_rep.asDiagonal()));
  out.qp.gradient.head(m * big_n) = 2.0 * (gtq * free_resp);
  if (has_slack) out.qp.hessian(nz - 1, nz - 1) = 2.0 * cfg.w_slack;
  out.qp.constant = dz0.dot(cfg.q_diag.asDiagonal() * dz0) +
                    free_resp.dot(q_rep.asDiagonal() * free_resp);

  const int n_out_rows = static_cast<int>(tightened.output.size()) * big_n;
  const int n_in_rows = static_cast<int>(tightened.input.size()) * big_n;
  out.qp.a_ineq = MatX::Zero(n_out_rows + n_in_rows, nz);
  out.qp.b_ineq = VecX::Zero(n_out_rows + n_in_rows);

  int r = 0;
  for (const auto& trow : tightened.output) {
    const VecX dir = h_jac.transpose() * trow.row.w_y + trow.row.w_x;
    for (int k = 1; k <= big_n; ++k, ++r) {
      out.qp.a_ineq.block(r, 0, 1, m * big_n) =
          dir.transpose() * gamma.middleRows((k - 1) * n, n);
      out.qp.a_ineq(r, nz - 1) = -1.0;  // eps relaxation
      out.qp.b_ineq(r) = trow.effective_bound - dir.dot(xi_ref) -
                         dir.dot(free_resp.segment((k - 1) * n, n));
    }
  }
  for (const auto& trow : tightened.input) {
    for (int k = 0; k < big_n; ++k, ++r) {
      out.qp.a_ineq.block(r, k * m, 1, m) = trow.row.m.transpose();
      out.qp.b_ineq(r) = trow.effective_bound - trow.row.m.dot(u_ref);
    }
  }
  return out;
}

struct MpcDiagnostics {
  double eps = 0.0;
  double margin_y_max = 0.0;
  double margin_u_max = 0.0;
  bool output_empty = false;
  bool saturated = false;
  double rho = 0.0;  // spectral radius of A + BK
  int active_rows = 0;
  QpStatus qp_status = QpStatus::kOptimal;
  double kkt_stationarity = 0.0;
  double kkt_primal = 0.0;
  double kkt_complementarity = 0.0;
  int qp_iterations = 0;
  double objective = 0.0;
};

struct MpcResult {
  ControlVector u;
  VecX v_star;  // applied open-loop component before saturation
  MpcDiagnostics diag;
};

/// One controller cycle: gain synthesis, covariance ladders, tightening,
/// condensation and QP solve. Applied control is v*_{0|t} saturated to the
/// untightened input box (e_{0|t} = 0, so the tube feedback contributes only
/// through the margins).
inline MpcResult mpc_step(const EstimateState& est,
                          const LinearizedSystem& linsys,
                          const StateVector& xi_ref, const VecX& u_ref,
                          const ControlModels& models, const MpcConfig& cfg,
                          double t, MatX* dare_warm_start = nullptr) {
  const TubeGain gain =
      synthesize_gain(linsys.a, linsys.b, MatX(cfg.lqr_q_diag.asDiagonal()),
                      MatX(cfg.lqr_r_diag.asDiagonal()), dare_warm_start);
  if (dare_warm_start) *dare_warm_start = gain.riccati_p;
  const CovarianceLadder ladder =
      propagate_covariances(gain.phi, linsys.g, models.p, linsys.h, linsys.v,
                            est.sigma, cfg.horizon);

  ConstraintSet set;
  const VecX h0 = measure(est.xi_hat, VecX::Zero(kNoiseDim), models.features,
                          models.camera, models.rotation, t);
  set.output_rows =
      build_fov_rows(est.xi_hat.to_vector(), linsys.h, h0, cfg.s_fov);
  const auto state_rows =
      build_state_rows(cfg.state_bounds, 12, kMeasurementDim);
  set.output_rows.insert(set.output_rows.end(), state_rows.begin(),
                         state_rows.end());
  set.input_rows = build_input_rows(6, cfg.m_trans, cfg.m_rot);

  const TightenedSet tightened = reduce_to_mpc_sets(
      set, ladder, gain.k, cfg.beta, cfg.horizon, cfg.chi2_dof_override);
  if (tightened.input_empty)
    throw DomainError(
        "tightened input set is empty; input rows carry no slack");

  const CondensedQp cqp =
      condense(linsys.a, linsys.b, cfg, tightened, linsys.h,
               est.xi_hat.to_vector(), xi_ref.to_vector(), u_ref);
  QpSolution sol = solve_qp(cqp.qp);

  MpcResult res;
  res.v_star = u_ref + sol.z.head(6);
  VecX u_sat = res.v_star;
  for (int j = 0; j < 6; ++j) {
    const double bound = j < 3 ? cfg.m_trans : cfg.m_rot;
    u_sat(j) = std::clamp(u_sat(j), -bound, bound);
  }
  res.diag.saturated = (u_sat - res.v_star).cwiseAbs().maxCoeff() > 0.0;
  res.u = ControlVector::from_vector(u_sat);

  res.diag.eps = cqp.has_slack ? sol.z(sol.z.size() - 1) : 0.0;
  for (const auto& trow : tightened.output)
    res.diag.margin_y_max = std::max(res.diag.margin_y_max, trow.margin);
  for (const auto& trow : tightened.input)
    res.diag.margin_u_max = std::max(res.diag.margin_u_max, trow.margin);
  res.diag.output_empty = tightened.output_empty;
  res.diag.rho = gain.rho;
  res.diag.active_rows = (sol.lambda.array() > 0.0).count();
  res.diag.qp_status = sol.status;
  res.diag.kkt_stationarity = sol.stationarity;
  res.diag.kkt_primal = sol.primal_feasibility;
  res.diag.kkt_complementarity = sol.complementarity;
  res.diag.qp_iterations = sol.iterations;
  res.diag.objective = sol.objective;
  return res;
}

}  // namespace dgnc
