#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "monmf/constraints.hpp"
#include "monmf/factorization.hpp"
#include "monmf/nnls.hpp"
#include "monmf/qp.hpp"
#include "monmf/rng.hpp"

namespace monmf {

/// W update for the monotone NMF model: given H, each row of W solves an
/// independent nonnegative least-squares problem against the design H'.
/// This factorizes the Kronecker-form QP over the rows of W exactly.
inline Eigen::MatrixXd solve_w_subproblem(const Eigen::MatrixXd& z,
                                          const Eigen::MatrixXd& h,
                                          double tol = 1e-10) {
  if (z.cols() != h.cols())
    throw std::invalid_argument("solve_w_subproblem: Z and H column counts");
  const Index n = z.rows();
  const Index s = h.rows();
  NnlsSolver solver(h.transpose());
  Eigen::MatrixXd w(n, s);
  for (Index i = 0; i < n; ++i)
    w.row(i) = solver.solve(z.row(i).transpose(), tol).transpose();
  return w;
}

struct HSubproblemOptions {
  HBackend backend = HBackend::pava_pgd;
  double tol = 1e-8;
  int max_iterations = 10000;
  /// Feasible warm start; with the projected-gradient backend the returned
  /// H never has a larger objective than the warm start.
  const Eigen::MatrixXd* warm_start = nullptr;
};

namespace detail {

inline double h_objective(const Eigen::MatrixXd& gram,
                          const Eigen::MatrixXd& wtz,
                          const Eigen::MatrixXd& h) {
  return 0.5 * (h.cwiseProduct(gram * h)).sum() - wtz.cwiseProduct(h).sum();
}

/// Accelerated projected gradient (FISTA with function restarts) on the
/// monotone cone. The feasible set is a product over rows, so the
/// projection splits into per-row isotonic projections. Returns the best
/// iterate seen, which includes the warm start, so the objective cannot
/// increase across an outer ALS step.
inline Eigen::MatrixXd solve_h_pgd(const Eigen::MatrixXd& z,
                                   const Eigen::MatrixXd& w,
                                   const MonotonicityPattern& pattern,
                                   const HSubproblemOptions& opts,
                                   bool* converged) {
  const Eigen::MatrixXd gram = w.transpose() * w;
  const Eigen::MatrixXd wtz = w.transpose() * z;

  Eigen::MatrixXd h = opts.warm_start
                          ? *opts.warm_start
                          : Eigen::MatrixXd::Zero(w.cols(), z.cols());
  project_rows(h, pattern);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                    Eigen::EigenvaluesOnly);
  const double lip = es.eigenvalues().maxCoeff();
  if (!(lip > 0.0)) {
    // W = 0: every feasible H is optimal.
    if (converged) *converged = true;
    return h;
  }

  const double grad_scale = 1.0 + wtz.norm();
  double obj = h_objective(gram, wtz, h);
  Eigen::MatrixXd best = h;
  double best_obj = obj;
  Eigen::MatrixXd y = h;
  double momentum = 1.0;
  bool ok = false;

  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd next = y - (gram * y - wtz) / lip;
    project_rows(next, pattern);
    const double next_obj = h_objective(gram, wtz, next);
    if (next_obj < best_obj) {
      best_obj = next_obj;
      best = next;
    }

    if (it % 5 == 0) {
      // Gradient-mapping residual at the new point.
      Eigen::MatrixXd step = next - (gram * next - wtz) / lip;
      project_rows(step, pattern);
      if (lip * (next - step).norm() <= opts.tol * grad_scale) {
        ok = true;
        h = next;
        break;
      }
    }

    if (next_obj > obj) {
      y = next;
      momentum = 1.0;
    } else {
      const double momentum_next =
          0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = next + ((momentum - 1.0) / momentum_next) * (next - h);
      momentum = momentum_next;
    }
    h = next;
    obj = next_obj;
  }
  if (converged) *converged = ok;
  return best_obj < h_objective(gram, wtz, h) ? best : h;
}

/// Full vectorized QP route: P = kron(W'W, I_m) on the row-stacked
/// vectorization of H, nonnegativity plus the block-diagonal ordering
/// constraints. Kept as the slow oracle path for the projected backend.
inline Eigen::MatrixXd solve_h_qp(const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& w,
                                  const MonotonicityPattern& pattern,
                                  const HSubproblemOptions& opts,
                                  bool* converged) {
  const Index s = w.cols();
  const Index m = z.cols();
  const Eigen::MatrixXd gram = w.transpose() * w;
  const Eigen::MatrixXd wtz = w.transpose() * z;

  QpProblem qp;
  qp.P = Eigen::MatrixXd::Zero(s * m, s * m);
  for (Index k = 0; k < s; ++k)
    for (Index kk = 0; kk < s; ++kk)
      for (Index j = 0; j < m; ++j) qp.P(k * m + j, kk * m + j) = gram(k, kk);
  qp.f = Eigen::VectorXd(s * m);
  for (Index k = 0; k < s; ++k)
    for (Index j = 0; j < m; ++j) qp.f(k * m + j) = -wtz(k, j);

  const Eigen::MatrixXd order = build_constraint_matrix(pattern, m);
  qp.G = Eigen::MatrixXd::Zero(s * m + order.rows(), s * m);
  qp.G.topRows(s * m) = -Eigen::MatrixXd::Identity(s * m, s * m);
  qp.G.bottomRows(order.rows()) = order;
  qp.l = Eigen::VectorXd::Zero(qp.G.rows());

  const QpSolution sol = solve_qp(qp, opts.tol, 20000);
  Eigen::MatrixXd h(s, m);
  for (Index k = 0; k < s; ++k)
    for (Index j = 0; j < m; ++j) h(k, j) = sol.x(k * m + j);
  // The splitting solver is feasible only to tolerance; snap to the cone.
  project_rows(h, pattern);
  if (converged) *converged = sol.status == QpStatus::optimal;
  return h;
}

}  // namespace detail

/// H update: minimize ||Z - WH||_F over H >= 0 with each row of H ordered
/// per the pattern. Both backends solve the same convex program; the
/// returned H is exactly feasible. `converged` (optional) reports whether
/// the backend met its tolerance within its iteration budget.
inline Eigen::MatrixXd solve_h_subproblem(const Eigen::MatrixXd& z,
                                          const Eigen::MatrixXd& w,
                                          const MonotonicityPattern& pattern,
                                          const HSubproblemOptions& opts = {},
                                          bool* converged = nullptr) {
  if (z.rows() != w.rows())
    throw std::invalid_argument("solve_h_subproblem: Z and W row counts");
  if (pattern.size() != static_cast<std::size_t>(w.cols()))
    throw std::invalid_argument(
        "solve_h_subproblem: pattern length must equal rank");
  if (opts.warm_start && (opts.warm_start->rows() != w.cols() ||
                          opts.warm_start->cols() != z.cols()))
    throw std::invalid_argument("solve_h_subproblem: warm start shape");
  if (opts.backend == HBackend::pava_pgd)
    return detail::solve_h_pgd(z, w, pattern, opts, converged);
  return detail::solve_h_qp(z, w, pattern, opts, converged);
}

namespace detail {

template <typename WStep>
inline void run_alternating_fit(const Eigen::MatrixXd& z,
                                const MonotonicityPattern& pattern,
                                const FitOptions& options, WStep&& w_step,
                                Eigen::MatrixXd& w, Eigen::MatrixXd& h,
                                FactorResult& result) {
  Eigen::MatrixXd w_prev = w;
  Eigen::MatrixXd h_prev = h;
  bool converged = false;
  bool inner_ok = true;
  for (int iter = 1; iter <= options.max_outer_iter; ++iter) {
    w = w_step(z, h);
    if (options.step_callback)
      options.step_callback({iter, FitStep::w_update, w, h});

    HSubproblemOptions ho;
    ho.backend = options.h_backend;
    ho.tol = options.inner_tol;
    ho.warm_start = &h;
    bool h_converged = true;
    h = solve_h_subproblem(z, w, pattern, ho, &h_converged);
    if (!h_converged && inner_ok) {
      inner_ok = false;
      result.diagnostics.push_back(
          "H subproblem stopped at its inner iteration limit");
    }

    if (options.normalize) normalize_in_place(w, h);
    if (options.step_callback)
      options.step_callback({iter, FitStep::h_update, w, h});

    result.objective_trace.push_back((z - w * h).norm());
    const double dw = (w - w_prev).norm();
    const double dh = (h - h_prev).norm();
    result.w_change_trace.push_back(dw);
    result.h_change_trace.push_back(dh);
    w_prev = w;
    h_prev = h;
    result.outer_iterations = iter;
    if (dw < options.tol && dh < options.tol) {
      converged = true;
      break;
    }
  }
  result.termination = (converged && inner_ok) ? Termination::converged
                                               : Termination::max_iterations;
}

inline void validate_fit_arguments(const DenseMatrix& z, Index rank,
                                   const MonotonicityPattern& pattern,
                                   const FitOptions& options,
                                   bool rank_capped) {
  if (rank < 1) throw std::invalid_argument("fit: rank must be at least 1");
  if (rank_capped && rank > std::min(z.rows(), z.cols()))
    throw std::invalid_argument("fit: rank exceeds min(rows, cols)");
  if (pattern.size() != static_cast<std::size_t>(rank))
    throw std::invalid_argument("fit: pattern length must equal rank");
  if (options.max_outer_iter < 1)
    throw std::invalid_argument("fit: max_outer_iter must be positive");
  if (options.tol <= 0 || options.inner_tol <= 0)
    throw std::invalid_argument("fit: tolerances must be positive");
  if (options.init_w &&
      (options.init_w->rows() != z.rows() || options.init_w->cols() != rank))
    throw std::invalid_argument("fit: init_w shape");
  if (options.init_h &&
      (options.init_h->rows() != rank || options.init_h->cols() != z.cols()))
    throw std::invalid_argument("fit: init_h shape");
}

}  // namespace detail

/// Monotonous NMF: Z ~ WH with W >= 0, H >= 0, and each row of H monotone
/// per the pattern. Alternating minimization; both half-steps are convex
/// programs solved to their global optimum (NNLS rows for W, isotonic
/// projected gradient or the vectorized QP for H), so the objective trace
/// is non-increasing.
inline FactorResult fit_monotonous_nmf(const DenseMatrix& z, Index rank,
                                       const MonotonicityPattern& pattern,
                                       const FitOptions& options = {}) {
  detail::validate_fit_arguments(z, rank, pattern, options, true);
  const Eigen::MatrixXd ze = z.eigen();

  FactorResult result;
  if ((ze.array() < 0.0).any())
    result.diagnostics.push_back(
        "input has negative entries; W >= 0 cannot absorb them, consider "
        "fit_monotonous_semi_nmf");

  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd w = options.init_w
                          ? Eigen::MatrixXd(options.init_w->eigen())
                          : random_uniform(z.rows(), rank, rng, 0.0, 1.0);
  Eigen::MatrixXd h = options.init_h
                          ? Eigen::MatrixXd(options.init_h->eigen())
                          : random_uniform(rank, z.cols(), rng, 0.0, 1.0);
  detail::project_rows(h, pattern);

  detail::run_alternating_fit(
      ze, pattern, options,
      [&](const Eigen::MatrixXd& zz, const Eigen::MatrixXd& hh) {
        return solve_w_subproblem(zz, hh, options.inner_tol);
      },
      w, h, result);

  detail::note_zero_rows(h, result);
  result.w = DenseMatrix::from_eigen(w);
  result.h = DenseMatrix::from_eigen(h);
  return result;
}

}  // namespace monmf
