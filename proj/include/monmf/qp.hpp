#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace monmf {

enum class QpStatus { optimal, max_iterations, infeasible };

/// Convex quadratic program in standard form:
///
///   minimize    0.5 x'Px + f'x
///   subject to  G x <= l
///               K x  = r        (K may have zero rows)
///
/// P must be symmetric positive semidefinite; symmetry is validated, but
/// semidefiniteness is trusted (all in-library callers build P as a Gram
/// matrix).
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;
  Eigen::VectorXd l;
  Eigen::MatrixXd K;
  Eigen::VectorXd r;

  Eigen::Index dim() const { return P.rows(); }
  Eigen::Index num_ineq() const { return G.rows(); }
  Eigen::Index num_eq() const { return K.rows(); }

  void validate() const {
    const Eigen::Index p = P.rows();
    if (p == 0 || P.cols() != p)
      throw std::invalid_argument("QpProblem: P must be square and non-empty");
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("QpProblem: P is not symmetric");
    if (f.size() != p) throw std::invalid_argument("QpProblem: f length");
    if (G.size() > 0 && G.cols() != p)
      throw std::invalid_argument("QpProblem: G column count");
    if (l.size() != G.rows())
      throw std::invalid_argument("QpProblem: l length");
    if (K.size() > 0 && K.cols() != p)
      throw std::invalid_argument("QpProblem: K column count");
    if (r.size() != K.rows())
      throw std::invalid_argument("QpProblem: r length");
  }
};

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  QpStatus status = QpStatus::max_iterations;
  int iterations = 0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ineq_multipliers;
  Eigen::VectorXd eq_multipliers;
};

namespace detail {

/// Max-norm KKT residual: stationarity, primal feasibility, dual sign,
/// and complementarity. Zero exactly at an optimal pair.
inline double qp_kkt_residual(const QpProblem& qp, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& lambda,
                              const Eigen::VectorXd& mu) {
  Eigen::VectorXd stat = qp.P * x + qp.f;
  if (qp.num_ineq() > 0) stat += qp.G.transpose() * lambda;
  if (qp.num_eq() > 0) stat += qp.K.transpose() * mu;
  double res = stat.cwiseAbs().maxCoeff();
  if (qp.num_ineq() > 0) {
    Eigen::VectorXd slack = qp.G * x - qp.l;  // feasible iff <= 0
    res = std::max(res, slack.maxCoeff());
    res = std::max(res, -std::min(0.0, lambda.minCoeff()));
    res = std::max(res, (lambda.array() * slack.array()).abs().maxCoeff());
  }
  if (qp.num_eq() > 0)
    res = std::max(res, (qp.K * x - qp.r).cwiseAbs().maxCoeff());
  return res;
}

struct PolishResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  double kkt = std::numeric_limits<double>::infinity();
  bool ok = false;
};

/// Solve the equality-constrained QP on the active set guessed from the
/// ADMM duals and slacks, with quasi-definite regularization plus iterative
/// refinement against the unregularized KKT system. Constraints whose
/// multiplier comes out negative are dropped and the solve is repeated.
inline PolishResult qp_polish(const QpProblem& qp, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y_ineq,
                              const Eigen::VectorXd& y_eq) {
  PolishResult out;
  const Eigen::Index p = qp.dim();
  const Eigen::Index t = qp.num_ineq();
  const Eigen::Index b = qp.num_eq();

  std::vector<int> active;
  if (t > 0) {
    const Eigen::VectorXd slack = qp.l - qp.G * x;
    const double ymax = y_ineq.size() ? y_ineq.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
      const bool dual_on = y_ineq(i) > 1e-10 * std::max(1.0, ymax);
      const bool tight = slack(i) < 1e-7 * (1.0 + std::abs(qp.l(i)));
      if (dual_on || tight) active.push_back(static_cast<int>(i));
    }
  }

  const double delta = 1e-9;
  for (int round = 0; round < 4; ++round) {
    const Eigen::Index na = static_cast<Eigen::Index>(active.size());
    const Eigen::Index dim = p + na + b;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    kkt.topLeftCorner(p, p) = qp.P;
    Eigen::VectorXd rhs(dim);
    rhs.head(p) = -qp.f;
    for (Eigen::Index k = 0; k < na; ++k) {
      kkt.block(p + k, 0, 1, p) = qp.G.row(active[static_cast<std::size_t>(k)]);
      kkt.block(0, p + k, p, 1) =
          qp.G.row(active[static_cast<std::size_t>(k)]).transpose();
      rhs(p + k) = qp.l(active[static_cast<std::size_t>(k)]);
    }
    if (b > 0) {
      kkt.block(p + na, 0, b, p) = qp.K;
      kkt.block(0, p + na, p, b) = qp.K.transpose();
      rhs.tail(b) = qp.r;
    }
    Eigen::MatrixXd kkt_reg = kkt;
    kkt_reg.topLeftCorner(p, p).diagonal().array() += delta;
    kkt_reg.bottomRightCorner(na + b, na + b).diagonal().array() -= delta;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt_reg);
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int refine = 0; refine < 3; ++refine)
      sol += lu.solve(rhs - kkt * sol);
    if (!sol.allFinite()) return out;

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(t);
    for (Eigen::Index k = 0; k < na; ++k)
      lambda(active[static_cast<std::size_t>(k)]) = sol(p + k);
    Eigen::VectorXd mu = b > 0 ? Eigen::VectorXd(sol.tail(b))
                               : Eigen::VectorXd();

    // Drop the most negative multiplier and retry; a wrong active-set
    // guess shows up as an infeasible dual sign.
    Eigen::Index worst = -1;
    double worst_val = -1e-9;
    for (Eigen::Index k = 0; k < na; ++k)
      if (sol(p + k) < worst_val) {
        worst_val = sol(p + k);
        worst = k;
      }
    if (worst >= 0 && round + 1 < 4) {
      active.erase(active.begin() + worst);
      continue;
    }

    out.x = sol.head(p);
    out.lambda = lambda;
    out.mu = mu;
    out.kkt = qp_kkt_residual(qp, out.x, out.lambda, out.mu);
    out.ok = true;
    return out;
  }
  return out;
}

}  // namespace detail

/// Operator-splitting (ADMM) solver with over-relaxation and an active-set
/// polish step. The splitting iterates with modest accuracy; the polish
/// solve is what brings the KKT residual down to `tol`. Primal
/// infeasibility is detected from the dual update direction.
///
/// status == optimal implies kkt_residual <= tol and max(Gx - l) <= tol.
inline QpSolution solve_qp(const QpProblem& qp, double tol = 1e-8,
                           int max_iterations = 20000) {
  qp.validate();
  if (tol <= 0) throw std::invalid_argument("solve_qp: tol must be positive");
  const Eigen::Index p = qp.dim();
  const Eigen::Index t = qp.num_ineq();
  const Eigen::Index b = qp.num_eq();
  const Eigen::Index m = t + b;

  Eigen::MatrixXd a(m, p);
  if (t > 0) a.topRows(t) = qp.G;
  if (b > 0) a.bottomRows(b) = qp.K;

  const double sigma = 1e-6;
  const double alpha = 1.6;
  double rho_base = 1.0;

  auto rho_vector = [&]() {
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(m, rho_base);
    rho.tail(b).array() *= 1e3;  // no-op when b == 0
    return rho;
  };
  Eigen::VectorXd rho = rho_vector();

  Eigen::LLT<Eigen::MatrixXd> chol;
  auto factor = [&]() {
    Eigen::MatrixXd reduced = qp.P;
    reduced.diagonal().array() += sigma;
    if (m > 0) reduced += a.transpose() * rho.asDiagonal() * a;
    chol.compute(reduced);
  };
  factor();

  auto project = [&](Eigen::VectorXd z) {
    for (Eigen::Index i = 0; i < t; ++i) z(i) = std::min(z(i), qp.l(i));
    for (Eigen::Index j = 0; j < b; ++j) z(t + j) = qp.r(j);
    return z;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z = project(Eigen::VectorXd::Zero(m));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(m);

  QpSolution best;
  best.x = x;
  best.ineq_multipliers = Eigen::VectorXd::Zero(t);
  best.eq_multipliers = Eigen::VectorXd::Zero(b);

  auto finish = [&](QpStatus status, int iters, const Eigen::VectorXd& xf,
                    const Eigen::VectorXd& lf, const Eigen::VectorXd& mf,
                    double kkt) {
    QpSolution s;
    s.x = xf;
    s.objective = 0.5 * xf.dot(qp.P * xf) + qp.f.dot(xf);
    s.status = status;
    s.iterations = iters;
    s.kkt_residual = kkt;
    s.ineq_multipliers = lf;
    s.eq_multipliers = mf;
    return s;
  };

  const int check_every = 25;
  const double polish_gate = std::max(1e-6, 100.0 * tol);
  const double eps_inf = 1e-6;

  int iter = 0;
  for (iter = 1; iter <= max_iterations; ++iter) {
    Eigen::VectorXd rhs = sigma * x - qp.f;
    if (m > 0) rhs += a.transpose() * (rho.cwiseProduct(z) - y);
    const Eigen::VectorXd xt = chol.solve(rhs);
    const Eigen::VectorXd zt = m > 0 ? Eigen::VectorXd(a * xt)
                                     : Eigen::VectorXd();

    x = alpha * xt + (1.0 - alpha) * x;
    if (m > 0) {
      Eigen::VectorXd zhat = alpha * zt + (1.0 - alpha) * z;
      Eigen::VectorXd z_next = project(zhat + y.cwiseQuotient(rho));
      Eigen::VectorXd y_next = y + rho.cwiseProduct(zhat - z_next);
      dy = y_next - y;
      z = z_next;
      y = y_next;
    }

    if (iter % check_every != 0 && iter != max_iterations) continue;

    const Eigen::VectorXd ax = m > 0 ? Eigen::VectorXd(a * x)
                                     : Eigen::VectorXd();
    const double rp = m > 0 ? (ax - z).cwiseAbs().maxCoeff() : 0.0;
    Eigen::VectorXd grad = qp.P * x + qp.f;
    if (m > 0) grad += a.transpose() * y;
    const double rd = grad.cwiseAbs().maxCoeff();

    const Eigen::VectorXd lambda = t > 0 ? Eigen::VectorXd(y.head(t))
                                         : Eigen::VectorXd();
    const Eigen::VectorXd mu = b > 0 ? Eigen::VectorXd(y.tail(b))
                                     : Eigen::VectorXd();
    const double kkt = detail::qp_kkt_residual(qp, x, lambda, mu);
    if (kkt < best.kkt_residual) {
      best.x = x;
      best.ineq_multipliers = lambda;
      best.eq_multipliers = mu;
      best.kkt_residual = kkt;
    }
    if (kkt <= tol) return finish(QpStatus::optimal, iter, x, lambda, mu, kkt);

    if (rp <= polish_gate && rd <= polish_gate) {
      detail::PolishResult pol = detail::qp_polish(qp, x, lambda, mu);
      if (pol.ok && pol.kkt <= tol)
        return finish(QpStatus::optimal, iter, pol.x, pol.lambda, pol.mu,
                      pol.kkt);
    }

    // Primal infeasibility certificate from the dual direction: a nonzero
    // dy with A'dy ~ 0, nonnegative on inequality rows, and negative
    // support value proves the constraint set is empty.
    const double ndy = m > 0 ? dy.cwiseAbs().maxCoeff() : 0.0;
    if (ndy > 1e-12 && rp > 10.0 * tol) {
      const double at_dy = (a.transpose() * dy).cwiseAbs().maxCoeff();
      if (at_dy <= eps_inf * ndy) {
        bool sign_ok = true;
        double support = 0.0;
        for (Eigen::Index i = 0; i < t; ++i) {
          if (dy(i) < -eps_inf * ndy) sign_ok = false;
          support += qp.l(i) * std::max(dy(i), 0.0);
        }
        for (Eigen::Index j = 0; j < b; ++j) support += qp.r(j) * dy(t + j);
        if (sign_ok && support <= -eps_inf * ndy) {
          QpSolution s = finish(QpStatus::infeasible, iter, x, lambda, mu,
                                std::numeric_limits<double>::infinity());
          return s;
        }
      }
    }

    // Residual balancing.
    if (iter % 100 == 0 && m > 0) {
      const double pscale =
          std::max({ax.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(), 1.0});
      const double dscale = std::max(
          {(qp.P * x).cwiseAbs().maxCoeff(),
           (a.transpose() * y).cwiseAbs().maxCoeff(),
           qp.f.cwiseAbs().maxCoeff(), 1.0});
      const double ratio = std::sqrt((rp / pscale) / std::max(rd / dscale, 1e-16));
      if (ratio > 5.0 || ratio < 0.2) {
        rho_base = std::clamp(rho_base * ratio, 1e-6, 1e6);
        rho = rho_vector();
        factor();
      }
    }
  }

  // Last chance: polish from the best iterate seen.
  detail::PolishResult pol =
      detail::qp_polish(qp, best.x, best.ineq_multipliers, best.eq_multipliers);
  if (pol.ok && pol.kkt <= tol)
    return finish(QpStatus::optimal, max_iterations, pol.x, pol.lambda, pol.mu,
                  pol.kkt);
  return finish(QpStatus::max_iterations, max_iterations, best.x,
                best.ineq_multipliers, best.eq_multipliers, best.kkt_residual);
}

}  // namespace monmf
