#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "monmf/dense_matrix.hpp"
#include "monmf/isotonic.hpp"

namespace monmf {

/// One ordering direction per source row of H; length equals the
/// factorization rank.
using MonotonicityPattern = std::vector<Direction>;

/// First-order difference operator D of shape (m-1) x m, with the sign
/// convention that a length-m signal h satisfies the ordering exactly when
/// D h <= 0:
///
///   increasing:  rows ( 1, -1)  so  h_j - h_{j+1} <= 0
///   decreasing:  rows (-1,  1)  so  h_{j+1} - h_j <= 0
inline Eigen::MatrixXd build_difference_matrix(Index m, Direction direction) {
  if (m < 2)
    throw std::invalid_argument("build_difference_matrix: need m >= 2");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m - 1, m);
  const double s = direction == Direction::increasing ? 1.0 : -1.0;
  for (Index j = 0; j + 1 < m; ++j) {
    d(j, j) = s;
    d(j, j + 1) = -s;
  }
  return d;
}

/// Block-diagonal stack of per-row difference operators, acting on the
/// row-stacked vectorization of H (x[k*m + j] = H(k, j)). A feasible H
/// satisfies A x <= 0 together with x >= 0.
inline Eigen::MatrixXd build_constraint_matrix(
    const MonotonicityPattern& pattern, Index m) {
  if (pattern.empty())
    throw std::invalid_argument("build_constraint_matrix: empty pattern");
  if (m < 2)
    throw std::invalid_argument("build_constraint_matrix: need m >= 2");
  const Index s = static_cast<Index>(pattern.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s * (m - 1), s * m);
  for (Index k = 0; k < s; ++k)
    a.block(k * (m - 1), k * m, m - 1, m) =
        build_difference_matrix(m, pattern[static_cast<std::size_t>(k)]);
  return a;
}

/// Exact feasibility check: H >= 0 and every row ordered per the pattern.
inline bool pattern_feasible(const Eigen::MatrixXd& h,
                             const MonotonicityPattern& pattern) {
  if (static_cast<std::size_t>(h.rows()) != pattern.size()) return false;
  if ((h.array() < 0.0).any()) return false;
  for (Index k = 0; k < h.rows(); ++k) {
    const bool inc = pattern[static_cast<std::size_t>(k)] == Direction::increasing;
    for (Index j = 0; j + 1 < h.cols(); ++j) {
      if (inc && h(k, j) > h(k, j + 1)) return false;
      if (!inc && h(k, j) < h(k, j + 1)) return false;
    }
  }
  return true;
}

}  // namespace monmf
