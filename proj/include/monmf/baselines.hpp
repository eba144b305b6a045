#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "monmf/factorization.hpp"
#include "monmf/nnls.hpp"
#include "monmf/rng.hpp"

namespace monmf {

namespace detail {

inline Eigen::MatrixXd require_nonnegative(const DenseMatrix& z,
                                           const char* who) {
  Eigen::MatrixXd ze = z.eigen();
  if ((ze.array() < 0.0).any())
    throw std::invalid_argument(std::string(who) +
                                ": nonnegative input required");
  return ze;
}

inline void validate_baseline_arguments(Index rank, const FitOptions& options) {
  if (rank < 1) throw std::invalid_argument("fit: rank must be at least 1");
  if (options.max_outer_iter < 1)
    throw std::invalid_argument("fit: max_outer_iter must be positive");
  if (options.tol <= 0 || options.inner_tol <= 0)
    throw std::invalid_argument("fit: tolerances must be positive");
}

}  // namespace detail

/// Unconstrained NMF with multiplicative updates. Denominators carry a
/// 1e-12 guard; entries that reach exact zero stay zero, which is where
/// the rank collapse this baseline exhibits on near-collinear data comes
/// from.
inline FactorResult fit_nmf_multiplicative(const DenseMatrix& z, Index rank,
                                           const FitOptions& options = {}) {
  detail::validate_baseline_arguments(rank, options);
  const Eigen::MatrixXd ze =
      detail::require_nonnegative(z, "fit_nmf_multiplicative");
  const double guard = 1e-12;

  FactorResult result;
  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd w = options.init_w
                          ? Eigen::MatrixXd(options.init_w->eigen())
                          : random_uniform(z.rows(), rank, rng, 0.0, 1.0);
  Eigen::MatrixXd h = options.init_h
                          ? Eigen::MatrixXd(options.init_h->eigen())
                          : random_uniform(rank, z.cols(), rng, 0.0, 1.0);
  w = w.cwiseMax(0.0);
  h = h.cwiseMax(0.0);

  Eigen::MatrixXd w_prev = w;
  Eigen::MatrixXd h_prev = h;
  bool converged = false;
  for (int iter = 1; iter <= options.max_outer_iter; ++iter) {
    const Eigen::MatrixXd wnum = ze * h.transpose();
    const Eigen::MatrixXd wden = w * (h * h.transpose());
    w = w.cwiseProduct(wnum.cwiseQuotient(wden.array().max(guard).matrix()));
    if (options.step_callback)
      options.step_callback({iter, FitStep::w_update, w, h});

    const Eigen::MatrixXd hnum = w.transpose() * ze;
    const Eigen::MatrixXd hden = (w.transpose() * w) * h;
    h = h.cwiseProduct(hnum.cwiseQuotient(hden.array().max(guard).matrix()));

    if (options.normalize) detail::normalize_in_place(w, h);
    if (options.step_callback)
      options.step_callback({iter, FitStep::h_update, w, h});

    result.objective_trace.push_back((ze - w * h).norm());
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
  result.termination =
      converged ? Termination::converged : Termination::max_iterations;
  detail::note_zero_rows(h, result);
  result.w = DenseMatrix::from_eigen(w);
  result.h = DenseMatrix::from_eigen(h);
  return result;
}

/// Unconstrained NMF by alternating exact NNLS: rows of W against the
/// design H', then columns of H against the design W. Each half-step is
/// solved to optimality, so the objective trace is non-increasing.
inline FactorResult fit_nmf_als(const DenseMatrix& z, Index rank,
                                const FitOptions& options = {}) {
  detail::validate_baseline_arguments(rank, options);
  const Eigen::MatrixXd ze = detail::require_nonnegative(z, "fit_nmf_als");

  FactorResult result;
  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd w = options.init_w
                          ? Eigen::MatrixXd(options.init_w->eigen())
                          : random_uniform(z.rows(), rank, rng, 0.0, 1.0);
  Eigen::MatrixXd h = options.init_h
                          ? Eigen::MatrixXd(options.init_h->eigen())
                          : random_uniform(rank, z.cols(), rng, 0.0, 1.0);
  w = w.cwiseMax(0.0);
  h = h.cwiseMax(0.0);

  Eigen::MatrixXd w_prev = w;
  Eigen::MatrixXd h_prev = h;
  bool converged = false;
  for (int iter = 1; iter <= options.max_outer_iter; ++iter) {
    {
      NnlsSolver rows(h.transpose());
      for (Index i = 0; i < ze.rows(); ++i)
        w.row(i) = rows.solve(ze.row(i).transpose(), options.inner_tol)
                       .transpose();
    }
    if (options.step_callback)
      options.step_callback({iter, FitStep::w_update, w, h});
    {
      NnlsSolver cols(w);
      for (Index j = 0; j < ze.cols(); ++j)
        h.col(j) = cols.solve(ze.col(j), options.inner_tol);
    }

    if (options.normalize) detail::normalize_in_place(w, h);
    if (options.step_callback)
      options.step_callback({iter, FitStep::h_update, w, h});

    result.objective_trace.push_back((ze - w * h).norm());
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
  result.termination =
      converged ? Termination::converged : Termination::max_iterations;
  detail::note_zero_rows(h, result);
  result.w = DenseMatrix::from_eigen(w);
  result.h = DenseMatrix::from_eigen(h);
  return result;
}

}  // namespace monmf
