#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dgnc/common.hpp"

namespace dgnc {

/// Chi-squared quantile via bisection on the regularized incomplete gamma
/// (CDF(x; p) = gamma_p(p/2, x/2)), to 1e-10.
inline double chi2_inverse(double beta, int p) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("chi2_inverse requires beta in (0,1)");
  if (p < 1) throw DomainError("chi2_inverse requires p >= 1");
  const auto cdf = [p](double x) {
    return boost::math::gamma_p(0.5 * p, 0.5 * x);
  };
  double lo = 0.0, hi = 1.0;
  while (cdf(hi) < beta) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < beta ? lo : hi) = mid;
    if (hi - lo < 1e-10 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

/// Stabilizing feedback with the paper's sign convention Phi = A + B K.
struct TubeGain {
  MatX k;
  MatX phi;
  double rho = 0.0;
  MatX riccati_p;  // fixed point, reusable as a warm start
};

/// LQR gain from the discrete Riccati fixed point, iterated to 1e-10.
/// Throws NotStabilizable if the iteration stalls or rho(A + BK) >= 1.
inline TubeGain synthesize_gain(const MatX& a, const MatX& b,
                                const MatX& q_lqr, const MatX& r_lqr,
                                const MatX* warm_start = nullptr,
                                int max_iter = 100000) {
  MatX p = (warm_start && warm_start->rows() == a.rows() &&
            warm_start->cols() == a.cols())
               ? *warm_start
               : q_lqr;
  MatX p_next;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const MatX btp = b.transpose() * p;
    const MatX gain_den = r_lqr + btp * b;
    p_next = a.transpose() * p * a -
             a.transpose() * p * b * gain_den.ldlt().solve(btp * a) + q_lqr;
    symmetrize(p_next);
    const double diff = (p_next - p).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, p_next.cwiseAbs().maxCoeff());
    p = p_next;
    if (diff < 1e-10 * scale) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NotStabilizable("discrete Riccati iteration did not converge");

  TubeGain out;
  const MatX gain_den = r_lqr + b.transpose() * p * b;
  out.k = -gain_den.ldlt().solve(b.transpose() * p * a);
  out.phi = a + b * out.k;
  out.riccati_p = p;
  out.rho = spectral_radius(out.phi);
  if (!(out.rho < 1.0))
    throw NotStabilizable("closed-loop matrix not strictly Schur, rho = " +
                          std::to_string(out.rho));
  return out;
}

inline TubeGain synthesize_gain(const MatX& a, const MatX& b,
                                const VecX& q_diag, const VecX& r_diag,
                                const MatX* warm_start = nullptr) {
  return synthesize_gain(a, b, MatX(q_diag.asDiagonal()),
                         MatX(r_diag.asDiagonal()), warm_start);
}

/// Xi_k / Upsilon_k ladders over the MPC horizon: Xi_0 = Sigma_t,
/// Xi_{k+1} = Phi Xi_k Phi^T + G P G^T, Upsilon_k = H Xi_k H^T + V P V^T.
struct CovarianceLadder {
  std::vector<MatX> xi;
  std::vector<MatX> upsilon;
};

inline CovarianceLadder propagate_covariances(const MatX& phi, const MatX& g,
                                              const MatX& p, const MatX& h,
                                              const MatX& v,
                                              const MatX& sigma_t, int horizon) {
  if (horizon < 1) throw DomainError("covariance ladder requires N >= 1");
  CovarianceLadder ladder;
  ladder.xi.reserve(horizon + 1);
  ladder.upsilon.reserve(horizon + 1);
  MatX gpg = g * p * g.transpose();
  symmetrize(gpg);
  MatX vpv = v * p * v.transpose();
  symmetrize(vpv);
  MatX xi = sigma_t;
  symmetrize(xi);
  for (int k = 0; k <= horizon; ++k) {
    ladder.xi.push_back(xi);
    MatX ups = h * xi * h.transpose() + vpv;
    symmetrize(ups);
    ladder.upsilon.push_back(std::move(ups));
    if (k < horizon) {
      xi = phi * xi * phi.transpose() + gpg;
      symmetrize(xi);
    }
  }
  return ladder;
}

enum class RowPartition { kFov, kState };

/// One row of S over the stacked [output; state] vector: the constraint in
/// state space is (w_y^T H + w_x^T) xi <= bound.
struct ConstraintRow {
  VecX w_y;  // output selector (may be empty for pure state rows)
  VecX w_x;  // state selector
  double bound = 0.0;
  RowPartition partition = RowPartition::kState;
};

/// Input constraint row M_i u <= bound.
struct InputRow {
  VecX m;
  double bound = 0.0;
};

struct ConstraintSet {
  std::vector<ConstraintRow> output_rows;  // Eq. (13)-(14) stack, d rows
  std::vector<InputRow> input_rows;        // d_u rows
};

/// Support-function margin of the row's confidence ellipsoid at step k.
/// p defaults to the rank of the covariance entering the quadratic form.
inline double tighten_output_row(const ConstraintRow& row,
                                 const CovarianceLadder& ladder, int k,
                                 double beta, int dof_override = 0) {
  const MatX& cov = (row.partition == RowPartition::kFov) ? ladder.upsilon[k]
                                                          : ladder.xi[k];
  const VecX& w = (row.partition == RowPartition::kFov) ? row.w_y : row.w_x;
  const double quad = w.dot(cov * w);
  if (quad <= 0.0) return 0.0;
  const int p = dof_override > 0 ? dof_override : std::max(1, psd_rank(cov));
  return std::sqrt(chi2_inverse(beta, p)) * std::sqrt(quad);
}

inline double tighten_input_row(const InputRow& row, const MatX& k_gain,
                                const MatX& xi_k, double beta,
                                int dof_override = 0) {
  const MatX cov = k_gain * xi_k * k_gain.transpose();
  const double quad = row.m.dot(cov * row.m);
  if (quad <= 0.0) return 0.0;
  const int p = dof_override > 0 ? dof_override : std::max(1, psd_rank(cov));
  return std::sqrt(chi2_inverse(beta, p)) * std::sqrt(quad);
}

struct TightenedRow {
  ConstraintRow row;
  double margin = 0.0;        // max over k of the support function
  double effective_bound = 0.0;  // bound - margin
  bool max_at_horizon = false;
};

struct TightenedInputRow {
  InputRow row;
  double margin = 0.0;
  double effective_bound = 0.0;
  bool max_at_horizon = false;
};

/// Y^MPC / U^MPC stacks: per-row worst-case margin over k = 0..N (the
/// row-wise collapse of the intersection of Y_k^beta), redundant rows
/// dropped, and an emptiness flag when mirror rows cross.
struct TightenedSet {
  std::vector<TightenedRow> output;
  std::vector<TightenedInputRow> input;
  bool output_empty = false;  // flag, not an error; slack handles it
  bool input_empty = false;
};

namespace detail {

inline VecX stacked_direction(const ConstraintRow& r) {
  VecX d(r.w_y.size() + r.w_x.size());
  if (r.w_y.size() > 0) d.head(r.w_y.size()) = r.w_y;
  if (r.w_x.size() > 0) d.tail(r.w_x.size()) = r.w_x;
  return d;
}

// Positive-scalar-multiple test between directions; returns the scale c with
// rhs = c * lhs when parallel, nullopt otherwise.
inline std::optional<double> positive_parallel(const VecX& lhs,
                                               const VecX& rhs) {
  if (lhs.size() != rhs.size()) return std::nullopt;
  const double ln = lhs.cwiseAbs().maxCoeff();
  const double rn = rhs.cwiseAbs().maxCoeff();
  if (ln == 0.0 || rn == 0.0) return std::nullopt;
  const double c = rn / ln;
  if ((rhs - c * lhs).cwiseAbs().maxCoeff() > 1e-12 * rn) return std::nullopt;
  // Confirm sign agreement (c computed from magnitudes).
  int idx = 0;
  lhs.cwiseAbs().maxCoeff(&idx);
  if (lhs(idx) * rhs(idx) <= 0.0) return std::nullopt;
  return c;
}

}  // namespace detail

inline TightenedSet reduce_to_mpc_sets(const ConstraintSet& set,
                                       const CovarianceLadder& ladder,
                                       const MatX& k_gain, double beta,
                                       int horizon, int dof_override = 0) {
  TightenedSet out;
  for (const auto& row : set.output_rows) {
    TightenedRow t;
    t.row = row;
    int argmax = 0;
    for (int k = 0; k <= horizon; ++k) {
      const double m = tighten_output_row(row, ladder, k, beta, dof_override);
      if (m > t.margin) {
        t.margin = m;
        argmax = k;
      }
    }
    t.effective_bound = row.bound - t.margin;
    t.max_at_horizon = (argmax == horizon);
    out.output.push_back(std::move(t));
  }
  for (const auto& row : set.input_rows) {
    TightenedInputRow t;
    t.row = row;
    int argmax = 0;
    for (int k = 0; k <= horizon; ++k) {
      const double m =
          tighten_input_row(row, k_gain, ladder.xi[k], beta, dof_override);
      if (m > t.margin) {
        t.margin = m;
        argmax = k;
      }
    }
    t.effective_bound = row.bound - t.margin;
    t.max_at_horizon = (argmax == horizon);
    out.input.push_back(std::move(t));
  }

  // Drop rows implied by a tighter parallel row.
  std::vector<TightenedRow> kept;
  for (const auto& cand : out.output) {
    bool implied = false;
    const VecX cd = detail::stacked_direction(cand.row);
    for (const auto& other : out.output) {
      if (&other == &cand) continue;
      const VecX od = detail::stacked_direction(other.row);
      const auto c = detail::positive_parallel(od, cd);
      if (!c) continue;
      const double other_scaled = other.effective_bound * (*c);
      if (other_scaled < cand.effective_bound ||
          (other_scaled == cand.effective_bound && &other < &cand)) {
        implied = true;
        break;
      }
    }
    if (!implied) kept.push_back(cand);
  }
  out.output = std::move(kept);

  // Mirror-row emptiness: directions d and -d with bounds summing negative.
  const auto crossed = [](const VecX& d1, double b1, const VecX& d2,
                          double b2) {
    const auto c = detail::positive_parallel(d1, VecX(-d2));
    return c && (b1 * (*c) + b2 < 0.0);
  };
  for (size_t i = 0; i < out.output.size() && !out.output_empty; ++i)
    for (size_t j = i + 1; j < out.output.size(); ++j) {
      if (crossed(detail::stacked_direction(out.output[i].row),
                  out.output[i].effective_bound,
                  detail::stacked_direction(out.output[j].row),
                  out.output[j].effective_bound)) {
        out.output_empty = true;
        break;
      }
    }
  for (size_t i = 0; i < out.input.size() && !out.input_empty; ++i)
    for (size_t j = i + 1; j < out.input.size(); ++j) {
      if (crossed(out.input[i].row.m, out.input[i].effective_bound,
                  out.input[j].row.m, out.input[j].effective_bound)) {
        out.input_empty = true;
        break;
      }
    }
  return out;
}

}  // namespace dgnc
