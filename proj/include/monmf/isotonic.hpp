#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace monmf {

enum class Direction { increasing, decreasing };

namespace detail {

// Pool-adjacent-violators for the non-decreasing cone, in place.
// Blocks are merged only on a strict violation, so input that is already
// non-decreasing is returned bit-identical (exact idempotence).
inline void pava_non_decreasing(double* v, std::ptrdiff_t n) {
  if (n <= 1) return;
  std::vector<double> value(static_cast<std::size_t>(n));
  std::vector<std::ptrdiff_t> count(static_cast<std::size_t>(n));
  std::size_t top = 0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    value[top] = v[i];
    count[top] = 1;
    ++top;
    while (top > 1 && value[top - 2] > value[top - 1]) {
      const double wa = static_cast<double>(count[top - 2]);
      const double wb = static_cast<double>(count[top - 1]);
      value[top - 2] = (wa * value[top - 2] + wb * value[top - 1]) / (wa + wb);
      count[top - 2] += count[top - 1];
      --top;
    }
  }
  std::ptrdiff_t out = 0;
  for (std::size_t b = 0; b < top; ++b)
    for (std::ptrdiff_t k = 0; k < count[b]; ++k) v[out++] = value[b];
}

}  // namespace detail

/// Euclidean projection onto the cone of vectors ordered per `direction`,
/// intersected with the nonnegative orthant when `nonneg` is set.
///
/// The nonnegative case clamps the unconstrained isotonic fit at zero;
/// for monotone cones this equals the projection onto the intersection.
/// Ordering and sign constraints hold exactly (not just within tolerance)
/// in the returned vector.
inline Eigen::VectorXd isotonic_project(const Eigen::VectorXd& v,
                                        Direction direction, bool nonneg) {
  Eigen::VectorXd out = v;
  const Eigen::Index n = out.size();
  if (direction == Direction::increasing) {
    detail::pava_non_decreasing(out.data(), n);
  } else {
    out.reverseInPlace();
    detail::pava_non_decreasing(out.data(), n);
    out.reverseInPlace();
  }
  if (nonneg) out = out.cwiseMax(0.0);
  return out;
}

inline std::vector<double> isotonic_project(const std::vector<double>& v,
                                            Direction direction, bool nonneg) {
  Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  Eigen::VectorXd y = isotonic_project(x, direction, nonneg);
  return std::vector<double>(y.data(), y.data() + y.size());
}

}  // namespace monmf
