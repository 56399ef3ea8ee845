#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dgnc/common.hpp"

namespace dgnc {

/// Dense convex QP: min 1/2 z^T H z + g^T z  s.t.  A z <= b.
struct QpProblem {
  MatX hessian;
  VecX gradient;
  MatX a_ineq;  // may have zero rows
  VecX b_ineq;
  double constant = 0.0;  // additive cost offset (dropped by the solver)
};

enum class QpStatus { kOptimal, kMaxIterations, kInfeasible };

struct QpSolution {
  VecX z;
  VecX lambda;  // multipliers for A z <= b, lambda >= 0
  QpStatus status = QpStatus::kOptimal;
  int iterations = 0;
  double objective = 0.0;
  // KKT residuals (infinity norms).
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
  // Objective at each outer iteration; nondecreasing for the dual
  // active-set scheme (its monotone certificate).
  std::vector<double> objective_trace;
};

namespace detail {

// Goldfarb-Idnani dual active-set method, inequality-only. Internally the
// constraints are kept in the >= 0 form s_i(x) = b_i - A_i x. J = L^-T Q and
// R track the factorization of the active-constraint normals in the metric
// of the Hessian; both are updated by Givens rotations as constraints enter
// and leave the working set.
class GoldfarbIdnani {
 public:
  GoldfarbIdnani(const MatX& hess, const VecX& grad, const MatX& a,
                 const VecX& b, double tol)
      : h_(hess), g_(grad), a_(a), b_(b), n_(static_cast<int>(grad.size())),
        m_(static_cast<int>(b.size())), tol_(tol) {}

  QpSolution solve(int max_iter) {
    QpSolution sol;
    Eigen::LLT<MatX> llt(h_);
    if (llt.info() != Eigen::Success)
      throw DomainError("QP Hessian is not positive definite");

    // Unconstrained optimum and J = L^-T.
    x_ = -llt.solve(g_);
    j_ = MatX::Identity(n_, n_);
    llt.matrixU().solveInPlace(j_);
    r_ = MatX::Zero(n_, n_);
    active_.clear();
    u_ = VecX::Zero(n_);
    iq_ = 0;

    VecX d(n_), z(n_), r_dual(n_), np(n_);
    std::vector<char> in_active(m_, 0);

    int iter = 0;
    while (true) {
      sol.objective_trace.push_back(0.5 * x_.dot(h_ * x_) + g_.dot(x_));
      if (++iter > max_iter) {
        sol.status = QpStatus::kMaxIterations;
        break;
      }
      // Most violated constraint.
      int p = -1;
      double worst = -tol_;
      for (int i = 0; i < m_; ++i) {
        if (in_active[i]) continue;
        const double s = b_(i) - a_.row(i).dot(x_);
        const double scaled = s / (1.0 + std::abs(b_(i)));
        if (scaled < worst) {
          worst = scaled;
          p = i;
        }
      }
      if (p < 0) {
        sol.status = QpStatus::kOptimal;
        break;
      }
      np = -a_.row(p).transpose();  // normal in the >= form
      double u_plus = 0.0;

      while (true) {
        if (++iter > max_iter) break;
        // Step directions.
        d = j_.transpose() * np;
        z.setZero();
        for (int k = iq_; k < n_; ++k) z += j_.col(k) * d(k);
        if (iq_ > 0) {
          r_dual.head(iq_) = r_.topLeftCorner(iq_, iq_)
                                 .triangularView<Eigen::Upper>()
                                 .solve(d.head(iq_));
        }

        // Partial step (drop candidate) and full step lengths.
        double t1 = kInf;
        int drop = -1;
        for (int k = 0; k < iq_; ++k) {
          if (r_dual(k) > 0.0) {
            const double ratio = u_(k) / r_dual(k);
            if (ratio < t1) {
              t1 = ratio;
              drop = k;
            }
          }
        }
        const double ztn = z.dot(np);
        const double s_p = b_(p) - a_.row(p).dot(x_);
        const double t2 = (std::abs(ztn) > kZeroStep) ? -s_p / ztn : kInf;
        const double t = std::min(t1, t2);

        if (t >= kInf) {
          sol.status = QpStatus::kInfeasible;
          finish(sol, iter);
          return sol;
        }

        if (t2 >= kInf) {
          // Dual-only step: move multipliers and drop a constraint.
          for (int k = 0; k < iq_; ++k) u_(k) -= t * r_dual(k);
          u_plus += t;
          remove_active(drop, in_active);
          continue;
        }

        x_ += t * z;
        for (int k = 0; k < iq_; ++k) u_(k) -= t * r_dual(k);
        u_plus += t;

        if (t == t2) {
          // Constraint p becomes active.
          if (!add_active(p, d, u_plus, in_active)) {
            // Degenerate normal; treat as satisfied to stay deterministic.
            break;
          }
          break;
        }
        remove_active(drop, in_active);
      }
      if (sol.status == QpStatus::kMaxIterations) break;
    }
    finish(sol, iter);
    return sol;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kZeroStep = 1e-14;

  bool add_active(int p, VecX& d, double u_plus, std::vector<char>& in_active) {
    // Zero d below position iq_ with Givens rotations applied to J columns.
    for (int j = n_ - 1; j > iq_; --j) {
      d(j - 1) = apply_givens(d(j - 1), d(j), j - 1, j);
      d(j) = 0.0;
    }
    if (std::abs(d(iq_)) < 1e-14 * (1.0 + d.head(iq_ + 1).norm()))
      return false;  // normal linearly dependent on the active set
    r_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    u_(iq_) = u_plus;
    active_.push_back(p);
    in_active[p] = 1;
    ++iq_;
    return true;
  }

  void remove_active(int pos, std::vector<char>& in_active) {
    in_active[active_[static_cast<size_t>(pos)]] = 0;
    active_.erase(active_.begin() + pos);
    for (int j = pos; j < iq_ - 1; ++j) {
      r_.col(j) = r_.col(j + 1);
      u_(j) = u_(j + 1);
    }
    r_.col(iq_ - 1).setZero();
    u_(iq_ - 1) = 0.0;
    --iq_;
    // Restore the triangular structure of R.
    for (int j = pos; j < iq_; ++j) {
      apply_givens_r(r_(j, j), r_(j + 1, j), j, j + 1);
      r_(j + 1, j) = 0.0;
    }
  }

  // Rotate J columns (c1, c2) to zero the second component of (a, b);
  // returns the rotated leading value hypot(a, b).
  double apply_givens(double a, double b, int c1, int c2) {
    const double g = std::hypot(a, b);
    if (g == 0.0) return a;
    const double c = a / g, s = b / g;
    const VecX t1 = j_.col(c1);
    j_.col(c1) = c * t1 + s * j_.col(c2);
    j_.col(c2) = -s * t1 + c * j_.col(c2).eval();
    return g;
  }

  void apply_givens_r(double a, double b, int row1, int row2) {
    const double g = std::hypot(a, b);
    if (g == 0.0) return;
    const double c = a / g, s = b / g;
    for (int col = 0; col < iq_; ++col) {
      const double t1 = r_(row1, col), t2 = r_(row2, col);
      r_(row1, col) = c * t1 + s * t2;
      r_(row2, col) = -s * t1 + c * t2;
    }
    const VecX t1 = j_.col(row1);
    j_.col(row1) = c * t1 + s * j_.col(row2);
    j_.col(row2) = -s * t1 + c * j_.col(row2).eval();
  }

  void finish(QpSolution& sol, int iter) {
    sol.z = x_;
    sol.lambda = VecX::Zero(m_);
    for (int k = 0; k < iq_; ++k) sol.lambda(active_[static_cast<size_t>(k)]) = u_(k);
    sol.iterations = iter;
  }

  MatX h_;
  VecX g_;
  MatX a_;
  VecX b_;
  int n_, m_;
  double tol_;

  VecX x_;
  MatX j_, r_;
  VecX u_;
  std::vector<int> active_;
  int iq_ = 0;
};

inline void kkt_residuals(const QpProblem& qp, QpSolution& sol) {
  const VecX grad_lag = qp.hessian * sol.z + qp.gradient +
                        (qp.a_ineq.rows() > 0
                             ? VecX(qp.a_ineq.transpose() * sol.lambda)
                             : VecX::Zero(sol.z.size()));
  sol.stationarity = grad_lag.cwiseAbs().maxCoeff();
  if (qp.a_ineq.rows() > 0) {
    const VecX slack = qp.a_ineq * sol.z - qp.b_ineq;
    sol.primal_feasibility = std::max(0.0, slack.maxCoeff());
    sol.complementarity =
        (sol.lambda.array() * slack.array()).abs().maxCoeff();
  } else {
    sol.primal_feasibility = 0.0;
    sol.complementarity = 0.0;
  }
  sol.objective = 0.5 * sol.z.dot(qp.hessian * sol.z) +
                  qp.gradient.dot(sol.z) + qp.constant;
}

/// Re-solve the equality KKT system on the final active set and keep the
/// refined point when it improves the residuals without breaking
/// feasibility or dual signs.
inline void polish(const QpProblem& qp, QpSolution& sol) {
  std::vector<int> active;
  for (int i = 0; i < sol.lambda.size(); ++i)
    if (sol.lambda(i) > 0.0) active.push_back(i);
  if (active.empty()) return;
  const int n = static_cast<int>(sol.z.size());
  const int k = static_cast<int>(active.size());
  MatX kkt = MatX::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = qp.hessian;
  VecX rhs(n + k);
  rhs.head(n) = -qp.gradient;
  for (int i = 0; i < k; ++i) {
    kkt.block(n + i, 0, 1, n) = qp.a_ineq.row(active[static_cast<size_t>(i)]);
    kkt.block(0, n + i, n, 1) =
        qp.a_ineq.row(active[static_cast<size_t>(i)]).transpose();
    rhs(n + i) = qp.b_ineq(active[static_cast<size_t>(i)]);
  }
  Eigen::PartialPivLU<MatX> lu(kkt);
  VecX w = lu.solve(rhs);
  w += lu.solve(rhs - kkt * w);  // one refinement step

  QpSolution cand = sol;
  cand.z = w.head(n);
  cand.lambda.setZero();
  for (int i = 0; i < k; ++i)
    cand.lambda(active[static_cast<size_t>(i)]) = w(n + i);
  if (cand.lambda.minCoeff() < -1e-9) return;
  cand.lambda = cand.lambda.cwiseMax(0.0);
  kkt_residuals(qp, cand);
  const double before =
      std::max({sol.stationarity, sol.primal_feasibility, sol.complementarity});
  const double after = std::max(
      {cand.stationarity, cand.primal_feasibility, cand.complementarity});
  if (after <= before) sol = cand;
}

}  // namespace detail

/// Deterministic dense QP solve meeting the KKT residual contract.
inline QpSolution solve_qp(const QpProblem& qp, double tol = 1e-10,
                           int max_iter = 2000) {
  detail::GoldfarbIdnani solver(qp.hessian, qp.gradient, qp.a_ineq, qp.b_ineq,
                                tol);
  QpSolution sol = solver.solve(max_iter);
  detail::kkt_residuals(qp, sol);
  if (sol.status == QpStatus::kOptimal) detail::polish(qp, sol);
  return sol;
}

}  // namespace dgnc
