#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "monmf/constraints.hpp"
#include "monmf/dense_matrix.hpp"
#include "monmf/factorization.hpp"
#include "monmf/linalg.hpp"
#include "monmf/rng.hpp"

namespace monmf {

enum class Scenario { s1, s2 };

/// Synthetic benchmark instance: s = 3 monotone source signals over m = 50
/// samples mixed by a random nonnegative n = 8 by 3 matrix, plus uniform
/// noise scaled by the data range.
struct ScenarioData {
  Scenario scenario = Scenario::s1;
  std::uint64_t seed = 0;
  double noise_level = 0.0;
  MonotonicityPattern pattern;
  DenseMatrix w_true;
  DenseMatrix h_true;
  DenseMatrix z_clean;
  DenseMatrix z_noisy;
  std::map<std::string, double> signal_params;
};

/// Additive uniform noise: Z + level * range(Z) * U(-1, 1) entrywise,
/// where range is max - min over all entries. The result may be negative;
/// clamping for methods that need Z >= 0 is a separate, explicit step.
inline DenseMatrix add_noise(const DenseMatrix& z, double level,
                             std::uint64_t seed) {
  if (level < 0) throw std::invalid_argument("add_noise: negative level");
  if (level == 0) return z;
  const double range = z.view().maxCoeff() - z.view().minCoeff();
  std::mt19937_64 rng(seed);
  DenseMatrix out = z;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) += level * range * (2.0 * uniform_unit(rng) - 1.0);
  return out;
}

inline ScenarioData generate_scenario(Scenario scenario, std::uint64_t seed,
                                      double noise_level = 0.05) {
  const Index n = 8, m = 50, s = 3;
  ScenarioData sd;
  sd.scenario = scenario;
  sd.seed = seed;
  sd.noise_level = noise_level;

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd h(s, m);
  const double tau1 = uniform_in(rng, 6.0, 16.0);
  sd.signal_params["tau1"] = tau1;
  double center = 0.0, width = 0.0, tau3 = 0.0;
  if (scenario == Scenario::s1) {
    center = uniform_in(rng, 15.0, 35.0);
    width = uniform_in(rng, 2.0, 6.0);
    sd.signal_params["logistic_center"] = center;
    sd.signal_params["logistic_width"] = width;
  } else {
    tau3 = uniform_in(rng, 6.0, 16.0);
    sd.signal_params["tau3"] = tau3;
  }

  // Rows are max-normalized so every source peaks at 1; dividing by a
  // positive constant keeps the ordering exact.
  const double sat_peak = 1.0 - std::exp(-static_cast<double>(m) / tau1);
  const double logi_peak =
      1.0 / (1.0 + std::exp(-(static_cast<double>(m) - center) / width));
  for (Index j = 0; j < m; ++j) {
    const double t = static_cast<double>(j + 1);
    h(0, j) = (1.0 - std::exp(-t / tau1)) / sat_peak;
    h(1, j) = t / static_cast<double>(m);
    if (scenario == Scenario::s1)
      h(2, j) = (1.0 / (1.0 + std::exp(-(t - center) / width))) / logi_peak;
    else
      h(2, j) = std::exp(-(t - 1.0) / tau3);
  }

  sd.pattern = scenario == Scenario::s1
                   ? MonotonicityPattern{Direction::increasing,
                                         Direction::increasing,
                                         Direction::increasing}
                   : MonotonicityPattern{Direction::increasing,
                                         Direction::increasing,
                                         Direction::decreasing};
  if (!pattern_feasible(h, sd.pattern))
    throw std::logic_error("generate_scenario: source signals not monotone");

  const Eigen::MatrixXd w = random_uniform(n, s, rng, 0.0, 1.0);
  sd.w_true = DenseMatrix::from_eigen(w);
  sd.h_true = DenseMatrix::from_eigen(h);
  sd.z_clean = DenseMatrix::from_eigen(w * h);
  sd.z_noisy = add_noise(sd.z_clean, noise_level,
                         mix_seed(seed ^ 0x6e6f697365ULL));
  return sd;
}

inline double reconstruction_error(const DenseMatrix& z, const DenseMatrix& w,
                                   const DenseMatrix& h) {
  if (w.cols() != h.rows() || z.rows() != w.rows() || z.cols() != h.cols())
    throw std::invalid_argument("reconstruction_error: shape mismatch");
  return (z.view() - w.view() * h.view()).norm();
}

/// Best pairing of estimated source rows to ground-truth rows under
/// per-row nonnegative scaling, by exhaustive search over permutations.
/// permutation[i] is the estimated row assigned to true row i.
struct AlignmentResult {
  std::vector<Index> permutation;
  std::vector<double> scales;
  std::vector<double> per_source_error;  // ||scale*est - true|| / ||true||
  double total_squared_error = 0.0;
};

inline AlignmentResult align_signals(const DenseMatrix& h_est,
                                     const DenseMatrix& h_true) {
  if (h_est.rows() != h_true.rows() || h_est.cols() != h_true.cols())
    throw std::invalid_argument("align_signals: shape mismatch");
  const Index s = h_true.rows();
  if (s > 6)
    throw std::invalid_argument(
        "align_signals: exhaustive search limited to 6 sources");

  const Eigen::MatrixXd est = h_est.eigen();
  const Eigen::MatrixXd truth = h_true.eigen();

  Eigen::MatrixXd scale(s, s), sqerr(s, s);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < s; ++j) {
      const double ee = est.row(j).squaredNorm();
      const double c =
          ee > 0.0 ? std::max(0.0, truth.row(i).dot(est.row(j)) / ee) : 0.0;
      scale(i, j) = c;
      sqerr(i, j) = (c * est.row(j) - truth.row(i)).squaredNorm();
    }
  }

  std::vector<Index> perm(static_cast<std::size_t>(s));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::vector<Index> best_perm = perm;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index i = 0; i < s; ++i)
      total += sqerr(i, perm[static_cast<std::size_t>(i)]);
    if (total < best_total) {
      best_total = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  AlignmentResult out;
  out.permutation = best_perm;
  out.total_squared_error = best_total;
  for (Index i = 0; i < s; ++i) {
    const Index j = best_perm[static_cast<std::size_t>(i)];
    out.scales.push_back(scale(i, j));
    const double tn = truth.row(i).norm();
    const double err = std::sqrt(sqerr(i, j));
    out.per_source_error.push_back(tn > 0.0 ? err / tn : err);
  }
  return out;
}

/// Method-level evaluation summary for one fitted factorization.
struct EvalReport {
  std::string method;
  double reconstruction_error = 0.0;
  Index h_effective_rank = 0;
  std::vector<double> per_source_signal_error;  // empty without ground truth
  bool monotonicity_feasible = false;
  int outer_iterations = 0;
  Termination termination = Termination::max_iterations;
  double wall_time_s = 0.0;
};

inline EvalReport evaluate_factors(const std::string& method,
                                   const DenseMatrix& z,
                                   const FactorResult& fit,
                                   const MonotonicityPattern* pattern,
                                   const DenseMatrix* h_true) {
  EvalReport report;
  report.method = method;
  report.reconstruction_error = reconstruction_error(z, fit.w, fit.h);
  report.h_effective_rank = effective_rank(fit.h);
  report.monotonicity_feasible =
      pattern != nullptr && pattern_feasible(fit.h.eigen(), *pattern);
  report.outer_iterations = fit.outer_iterations;
  report.termination = fit.termination;
  if (h_true != nullptr)
    report.per_source_signal_error =
        align_signals(fit.h, *h_true).per_source_error;
  return report;
}

}  // namespace monmf
