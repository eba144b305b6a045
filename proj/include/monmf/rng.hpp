#pragma once

#include <cstdint>
#include <random>

#include "monmf/dense_matrix.hpp"

namespace monmf {

/// Uniform double in [0, 1) built from the top 53 bits of the engine output.
/// Used instead of std::uniform_real_distribution, whose output sequence is
/// implementation-defined; results must be reproducible from the seed alone.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Entries drawn i.i.d. uniform in [lo, hi), row-major order.
inline Eigen::MatrixXd random_uniform(Index rows, Index cols,
                                      std::mt19937_64& rng, double lo = 0.0,
                                      double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform_in(rng, lo, hi);
  return m;
}

inline DenseMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                                 double lo = 0.0, double hi = 1.0) {
  return DenseMatrix::from_eigen(random_uniform(rows, cols, rng, lo, hi));
}

/// splitmix64 mixing step; derives decorrelated sub-seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace monmf
