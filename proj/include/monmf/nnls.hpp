#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace monmf {

/// Nonnegative least squares, min_{x >= 0} ||A x - b||, solved with the
/// Lawson-Hanson active-set method on the normal equations.
///
/// The solver caches A'A so that many right-hand sides against one design
/// matrix (the common case in alternating factor updates) pay for the Gram
/// matrix once. At return, entries with x_j > 0 have gradient magnitude
/// at most tol and entries with x_j = 0 have gradient >= -tol, so x is a
/// KKT point of the convex problem.
class NnlsSolver {
 public:
  explicit NnlsSolver(Eigen::MatrixXd a) : a_(std::move(a)) {
    if (a_.size() == 0)
      throw std::invalid_argument("NnlsSolver: empty design matrix");
    gram_ = a_.transpose() * a_;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, double tol = 1e-10) const {
    if (b.size() != a_.rows())
      throw std::invalid_argument("NnlsSolver: right-hand side length");
    const Eigen::Index p = a_.cols();
    const Eigen::VectorXd atb = a_.transpose() * b;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd w = atb;  // negative gradient, A'b - A'A x
    std::vector<char> passive(static_cast<std::size_t>(p), 0);
    std::vector<char> blocked(static_cast<std::size_t>(p), 0);

    const int max_outer = static_cast<int>(10 * p + 10);
    for (int outer = 0; outer < max_outer; ++outer) {
      Eigen::Index enter = -1;
      double best = tol;
      for (Eigen::Index j = 0; j < p; ++j)
        if (!passive[j] && !blocked[j] && w(j) > best) {
          best = w(j);
          enter = j;
        }
      if (enter < 0) break;
      passive[enter] = 1;

      bool updated = false;
      const int max_inner = static_cast<int>(5 * p + 5);
      for (int inner = 0; inner < max_inner; ++inner) {
        std::vector<int> idx;
        for (Eigen::Index j = 0; j < p; ++j)
          if (passive[j]) idx.push_back(static_cast<int>(j));
        Eigen::MatrixXd gpp = gram_(idx, idx);
        Eigen::VectorXd rhs = atb(idx);
        Eigen::VectorXd z = gpp.ldlt().solve(rhs);
        if (!z.allFinite()) {
          // Degenerate passive set; fall back to a rank-revealing solve
          // on the original columns.
          Eigen::MatrixXd ap(a_.rows(), static_cast<Eigen::Index>(idx.size()));
          for (std::size_t k = 0; k < idx.size(); ++k)
            ap.col(static_cast<Eigen::Index>(k)) = a_.col(idx[k]);
          z = ap.completeOrthogonalDecomposition().solve(b);
        }

        double zmin = z.minCoeff();
        if (zmin > 0.0) {
          for (std::size_t k = 0; k < idx.size(); ++k)
            x(idx[k]) = z(static_cast<Eigen::Index>(k));
          updated = true;
          break;
        }

        // Step toward z until the first passive coordinate hits zero.
        double alpha = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const double zk = z(static_cast<Eigen::Index>(k));
          if (zk <= 0.0) {
            const double xk = x(idx[k]);
            const double denom = xk - zk;
            if (denom > 0.0) alpha = std::min(alpha, xk / denom);
          }
        }
        if (!std::isfinite(alpha)) alpha = 0.0;
        if (alpha <= 0.0) {
          // The entering variable is pinned at zero by degeneracy; undo the
          // move and never select it again for this right-hand side.
          passive[enter] = 0;
          blocked[enter] = 1;
          break;
        }
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const Eigen::Index j = idx[k];
          x(j) += alpha * (z(static_cast<Eigen::Index>(k)) - x(j));
        }
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const Eigen::Index j = idx[k];
          if (z(static_cast<Eigen::Index>(k)) <= 0.0 && x(j) <= 1e-14) {
            x(j) = 0.0;
            passive[j] = 0;
          }
        }
      }
      if (updated) std::fill(blocked.begin(), blocked.end(), 0);
      w = atb - gram_ * x;
    }
    return x;
  }

  const Eigen::MatrixXd& design() const { return a_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd gram_;
};

inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            double tol = 1e-10) {
  return NnlsSolver(a).solve(b, tol);
}

}  // namespace monmf
