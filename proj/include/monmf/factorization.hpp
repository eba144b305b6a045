#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monmf/constraints.hpp"
#include "monmf/dense_matrix.hpp"
#include "monmf/rng.hpp"

namespace monmf {

enum class Termination { converged, max_iterations };

enum class HBackend { pava_pgd, generic_qp };

enum class FitStep { w_update, h_update };

/// Snapshot passed to FitOptions::step_callback after each half-step of an
/// alternating fit. For w_update, `h` is the factor the update was solved
/// against; for h_update, both factors are the post-step (and, when
/// enabled, normalized) pair.
struct FitStepInfo {
  int outer_iteration;
  FitStep step;
  const Eigen::MatrixXd& w;
  const Eigen::MatrixXd& h;
};

struct FitOptions {
  int max_outer_iter = 500;
  double tol = 1e-6;        // outer stop: ||dW|| < tol and ||dH|| < tol
  double inner_tol = 1e-8;  // subproblem (NNLS / projection / QP) tolerance
  HBackend h_backend = HBackend::pava_pgd;
  bool normalize = true;
  std::uint64_t seed = 0;

  /// Explicit initial factors; when absent, factors are drawn from the
  /// seeded generator. An initial H is projected to the feasible set.
  std::optional<DenseMatrix> init_w;
  std::optional<DenseMatrix> init_h;

  std::function<void(const FitStepInfo&)> step_callback;
};

struct FactorResult {
  DenseMatrix w;
  DenseMatrix h;
  std::vector<double> objective_trace;  // ||Z - WH||_F after each outer step
  std::vector<double> w_change_trace;
  std::vector<double> h_change_trace;
  int outer_iterations = 0;
  Termination termination = Termination::max_iterations;
  std::vector<std::string> diagnostics;
};

namespace detail {

/// Scale each nonzero row of H so its largest magnitude entry becomes 1,
/// absorbing the scale into the matching column of W. Leaves the product
/// WH unchanged up to rounding; zero rows are left untouched.
inline void normalize_in_place(Eigen::MatrixXd& w, Eigen::MatrixXd& h) {
  for (Index k = 0; k < h.rows(); ++k) {
    const double peak = h.row(k).cwiseAbs().maxCoeff();
    if (peak > 0.0) {
      h.row(k) /= peak;
      w.col(k) *= peak;
    }
  }
}

inline void project_rows(Eigen::MatrixXd& h, const MonotonicityPattern& pattern) {
  for (Index k = 0; k < h.rows(); ++k) {
    Eigen::VectorXd row = h.row(k).transpose();
    h.row(k) =
        isotonic_project(row, pattern[static_cast<std::size_t>(k)], true)
            .transpose();
  }
}

inline void note_zero_rows(const Eigen::MatrixXd& h, FactorResult& result) {
  for (Index k = 0; k < h.rows(); ++k)
    if ((h.row(k).array() == 0.0).all())
      result.diagnostics.push_back("source row " + std::to_string(k) +
                                   " is identically zero");
}

}  // namespace detail

/// Rescale (W, H) so that each nonzero row of H peaks at 1. The product WH
/// is preserved; scales applied to W columns are the reciprocals of the row
/// scales.
inline std::pair<DenseMatrix, DenseMatrix> normalize_factors(
    const DenseMatrix& w, const DenseMatrix& h) {
  if (w.cols() != h.rows())
    throw std::invalid_argument("normalize_factors: W cols must equal H rows");
  Eigen::MatrixXd we = w.eigen();
  Eigen::MatrixXd he = h.eigen();
  detail::normalize_in_place(we, he);
  return {DenseMatrix::from_eigen(we), DenseMatrix::from_eigen(he)};
}

}  // namespace monmf
