#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "monmf/linalg.hpp"
#include "monmf/monotonous_nmf.hpp"

namespace monmf {

/// Unconstrained W update: the minimum-Frobenius-norm least-squares
/// solution W = Z H' (H H')^+. With a rank-deficient H this picks the
/// minimum-norm W among all minimizers of ||Z - WH||.
inline Eigen::MatrixXd update_w_least_squares(const Eigen::MatrixXd& z,
                                              const Eigen::MatrixXd& h) {
  if (z.cols() != h.cols())
    throw std::invalid_argument("update_w_least_squares: column counts");
  const Eigen::MatrixXd hht = h * h.transpose();
  return z * h.transpose() * pseudo_inverse(hht);
}

/// Monotonous semi-NMF: Z ~ WH where W is unconstrained in sign and H
/// keeps the nonnegative monotone row constraints. A relaxation of
/// fit_monotonous_nmf, suitable for mixed-sign data; on nonnegative data
/// its optimum can only be at least as good.
inline FactorResult fit_monotonous_semi_nmf(const DenseMatrix& z, Index rank,
                                            const MonotonicityPattern& pattern,
                                            const FitOptions& options = {}) {
  detail::validate_fit_arguments(z, rank, pattern, options, true);
  const Eigen::MatrixXd ze = z.eigen();

  FactorResult result;
  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd w = options.init_w
                          ? Eigen::MatrixXd(options.init_w->eigen())
                          : random_uniform(z.rows(), rank, rng, -1.0, 1.0);
  Eigen::MatrixXd h = options.init_h
                          ? Eigen::MatrixXd(options.init_h->eigen())
                          : random_uniform(rank, z.cols(), rng, 0.0, 1.0);
  detail::project_rows(h, pattern);

  detail::run_alternating_fit(
      ze, pattern, options,
      [](const Eigen::MatrixXd& zz, const Eigen::MatrixXd& hh) {
        return update_w_least_squares(zz, hh);
      },
      w, h, result);

  detail::note_zero_rows(h, result);
  result.w = DenseMatrix::from_eigen(w);
  result.h = DenseMatrix::from_eigen(h);
  return result;
}

}  // namespace monmf
