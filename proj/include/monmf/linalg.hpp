#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "monmf/dense_matrix.hpp"

namespace monmf {

inline double frobenius_norm(const DenseMatrix& m) { return m.view().norm(); }

/// Default relative cutoff for numerical rank decisions: machine epsilon
/// times the larger dimension, applied relative to the largest singular
/// value.
inline double default_sv_tolerance(Index rows, Index cols) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols));
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values at or below
/// tol * sigma_max are treated as zero. tol < 0 selects the default cutoff.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m,
                                      double tol = -1.0) {
  if (m.size() == 0)
    throw std::invalid_argument("pseudo_inverse: empty matrix");
  if (tol < 0) tol = default_sv_tolerance(m.rows(), m.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = tol * sv(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline DenseMatrix pseudo_inverse(const DenseMatrix& m, double tol = -1.0) {
  if (m.empty()) throw std::invalid_argument("pseudo_inverse: empty matrix");
  return DenseMatrix::from_eigen(pseudo_inverse(m.eigen(), tol));
}

/// Count of singular values strictly above tol * sigma_max.
inline Index effective_rank(const Eigen::MatrixXd& m, double tol = -1.0) {
  if (m.size() == 0) return 0;
  if (tol < 0) tol = default_sv_tolerance(m.rows(), m.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = tol * sv(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return rank;
}

inline Index effective_rank(const DenseMatrix& m, double tol = -1.0) {
  if (m.empty()) return 0;
  return effective_rank(m.eigen(), tol);
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions do not match");
  return DenseMatrix::from_eigen(a.view() * b.view());
}

}  // namespace monmf
