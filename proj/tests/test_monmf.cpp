#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "monmf/constraints.hpp"
#include "monmf/monotonous_nmf.hpp"
#include "monmf/qp.hpp"
#include "monmf/rng.hpp"

using namespace monmf;

namespace {

MonotonicityPattern all_increasing(std::size_t s) {
  return MonotonicityPattern(s, Direction::increasing);
}

bool trace_non_increasing(const std::vector<double>& trace, double slack) {
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k] > trace[k - 1] + slack) return false;
  return true;
}

}  // namespace

TEST_CASE("build_difference_matrix reference layouts") {
  Eigen::MatrixXd inc = build_difference_matrix(3, Direction::increasing);
  REQUIRE(inc.rows() == 2);
  REQUIRE(inc.cols() == 3);
  Eigen::MatrixXd inc_expect(2, 3);
  inc_expect << 1, -1, 0, 0, 1, -1;
  CHECK((inc - inc_expect).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd dec = build_difference_matrix(2, Direction::decreasing);
  REQUIRE(dec.rows() == 1);
  CHECK(dec(0, 0) == -1.0);
  CHECK(dec(0, 1) == 1.0);

  // An increasing vector satisfies D v <= 0 with slack equal to the steps.
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 3.0;
  Eigen::VectorXd dv = inc * v;
  CHECK(dv(0) == -1.0);
  CHECK(dv(1) == -1.0);

  CHECK_THROWS_AS(build_difference_matrix(1, Direction::increasing),
                  std::invalid_argument);
}

TEST_CASE("build_constraint_matrix acts blockwise on row-stacked H") {
  const Index m = 3;
  Eigen::MatrixXd h(2, 3);
  h << 1, 2, 3, 3, 2, 1;
  Eigen::VectorXd x(6);  // row-stacked vectorization
  x << h(0, 0), h(0, 1), h(0, 2), h(1, 0), h(1, 1), h(1, 2);

  {
    Eigen::MatrixXd a = build_constraint_matrix(
        {Direction::increasing, Direction::increasing}, m);
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 6);
    Eigen::VectorXd ax = a * x;
    // First row of H is increasing, second violates.
    CHECK(ax(0) <= 0.0);
    CHECK(ax(1) <= 0.0);
    CHECK(ax(2) > 0.0);
    CHECK(ax(3) > 0.0);
  }
  {
    Eigen::MatrixXd a = build_constraint_matrix(
        {Direction::increasing, Direction::decreasing}, m);
    CHECK(((a * x).array() <= 0.0).all());
  }
  {
    Eigen::MatrixXd a =
        build_constraint_matrix({Direction::decreasing}, 4);
    CHECK((a - build_difference_matrix(4, Direction::decreasing))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(build_constraint_matrix({}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_constraint_matrix({Direction::increasing}, 1),
                  std::invalid_argument);
}

TEST_CASE("pattern_feasible is exact") {
  Eigen::MatrixXd h(2, 3);
  h << 0, 1, 2, 2, 1, 0;
  CHECK(pattern_feasible(h, {Direction::increasing, Direction::decreasing}));
  CHECK_FALSE(
      pattern_feasible(h, {Direction::decreasing, Direction::decreasing}));
  h(0, 0) = -1e-300;
  CHECK_FALSE(
      pattern_feasible(h, {Direction::increasing, Direction::decreasing}));
}

TEST_CASE("solve_w_subproblem recovers an interior optimum") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd w0(3, 2);
  w0 << 1, 0, 0, 1, 1, 1;
  Eigen::MatrixXd h = random_uniform(2, 12, rng, 0.1, 1.0);
  Eigen::MatrixXd z = w0 * h;
  Eigen::MatrixXd w = solve_w_subproblem(z, h);
  CHECK((w - w0).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve_w_subproblem clamps against an identity H") {
  Eigen::MatrixXd z(2, 3);
  z << 1.0, -2.0, 0.5, -0.25, 3.0, -1.0;
  Eigen::MatrixXd w = solve_w_subproblem(z, Eigen::MatrixXd::Identity(3, 3));
  CHECK((w - z.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("solve_w_subproblem equals the Kronecker-form QP") {
  std::mt19937_64 rng(7);
  const Index n = 6, m = 12, s = 3;
  Eigen::MatrixXd z = random_uniform(n, m, rng, -0.2, 1.0);
  Eigen::MatrixXd h = random_uniform(s, m, rng, 0.0, 1.0);

  Eigen::MatrixXd w = solve_w_subproblem(z, h);

  // Row-stacked vectorization of W; P = I_n kron HH', f_i = -H z_i.
  const Eigen::MatrixXd hht = h * h.transpose();
  QpProblem qp;
  qp.P = Eigen::MatrixXd::Zero(n * s, n * s);
  qp.f = Eigen::VectorXd(n * s);
  for (Index i = 0; i < n; ++i) {
    qp.P.block(i * s, i * s, s, s) = hht;
    qp.f.segment(i * s, s) = -h * z.row(i).transpose();
  }
  qp.G = -Eigen::MatrixXd::Identity(n * s, n * s);
  qp.l = Eigen::VectorXd::Zero(n * s);
  qp.K = Eigen::MatrixXd(0, n * s);
  qp.r = Eigen::VectorXd(0);
  QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < s; ++k)
      CHECK(w(i, k) == Catch::Approx(sol.x(i * s + k)).margin(1e-6));
}

TEST_CASE("solve_h_subproblem with orthonormal W returns the planted H") {
  std::mt19937_64 rng(11);
  const Index n = 8, m = 15, s = 3;
  Eigen::MatrixXd gauss = random_uniform(n, s, rng, -1.0, 1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd w =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, s);

  Eigen::MatrixXd h0 = random_uniform(s, m, rng, 0.0, 1.0);
  MonotonicityPattern pattern{Direction::increasing, Direction::decreasing,
                              Direction::increasing};
  detail::project_rows(h0, pattern);

  Eigen::MatrixXd z = w * h0;
  bool converged = false;
  Eigen::MatrixXd h = solve_h_subproblem(z, w, pattern, {}, &converged);
  CHECK(converged);
  CHECK((h - h0).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(pattern_feasible(h, pattern));
}

TEST_CASE("solve_h_subproblem with a single all-ones column is isotonic "
          "regression of the column means") {
  std::mt19937_64 rng(13);
  const Index n = 5, m = 20;
  Eigen::MatrixXd z = random_uniform(n, m, rng, -1.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(n, 1);

  Eigen::MatrixXd h =
      solve_h_subproblem(z, w, {Direction::increasing});
  Eigen::VectorXd means = z.colwise().mean().transpose();
  Eigen::VectorXd expect = isotonic_project(means, Direction::increasing, true);
  CHECK((h.row(0).transpose() - expect).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("both H backends agree with each other") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const Index n = 6, m = 15, s = 3;
    Eigen::MatrixXd z = random_uniform(n, m, rng, -0.5, 1.0);
    Eigen::MatrixXd w = random_uniform(n, s, rng, 0.0, 1.0);
    MonotonicityPattern pattern{Direction::increasing, Direction::decreasing,
                                trial % 2 ? Direction::increasing
                                          : Direction::decreasing};

    HSubproblemOptions fast;
    fast.backend = HBackend::pava_pgd;
    Eigen::MatrixXd h_fast = solve_h_subproblem(z, w, pattern, fast);

    HSubproblemOptions slow;
    slow.backend = HBackend::generic_qp;
    Eigen::MatrixXd h_slow = solve_h_subproblem(z, w, pattern, slow);

    CHECK(pattern_feasible(h_fast, pattern));
    CHECK(pattern_feasible(h_slow, pattern));
    CHECK((h_fast - h_slow).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("solve_h_subproblem never worsens a feasible warm start") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 7, m = 24, s = 2;
    Eigen::MatrixXd z = random_uniform(n, m, rng, 0.0, 1.0);
    Eigen::MatrixXd w = random_uniform(n, s, rng, 0.0, 1.0);
    Eigen::MatrixXd warm = random_uniform(s, m, rng, 0.0, 1.0);
    MonotonicityPattern pattern{Direction::increasing, Direction::decreasing};
    detail::project_rows(warm, pattern);

    HSubproblemOptions opts;
    opts.warm_start = &warm;
    Eigen::MatrixXd h = solve_h_subproblem(z, w, pattern, opts);
    CHECK((z - w * h).norm() <= (z - w * warm).norm() + 1e-12);
  }
}

TEST_CASE("normalize_factors scales row peaks to one and preserves the product") {
  DenseMatrix w(2, 2, {1.0, 2.0, 3.0, 4.0});
  DenseMatrix h(2, 3, {0.5, 1.0, 2.0, 0.0, 0.0, 0.0});
  auto [wn, hn] = normalize_factors(w, h);

  CHECK(hn(0, 0) == Catch::Approx(0.25));
  CHECK(hn(0, 2) == 1.0);
  CHECK(wn(0, 0) == Catch::Approx(2.0));
  CHECK(wn(1, 0) == Catch::Approx(6.0));
  // Zero row untouched, and so is its W column.
  CHECK(hn(1, 1) == 0.0);
  CHECK(wn(0, 1) == 2.0);

  CHECK((wn.view() * hn.view() - w.view() * h.view()).cwiseAbs().maxCoeff() <=
        1e-12);

  // Already normalized input is a fixed point.
  auto [wn2, hn2] = normalize_factors(wn, hn);
  CHECK(wn2 == wn);
  CHECK(hn2 == hn);

  std::mt19937_64 rng(23);
  DenseMatrix wr = random_matrix(5, 3, rng, 0.0, 2.0);
  DenseMatrix hr = random_matrix(3, 9, rng, 0.0, 2.0);
  auto [wrn, hrn] = normalize_factors(wr, hr);
  for (Index k = 0; k < 3; ++k)
    CHECK(hrn.view().row(k).cwiseAbs().maxCoeff() == Catch::Approx(1.0));
  CHECK((wrn.view() * hrn.view() - wr.view() * hr.view())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(normalize_factors(wr, DenseMatrix(2, 4)),
                  std::invalid_argument);
}

TEST_CASE("fit_monotonous_nmf validates its arguments") {
  DenseMatrix z(4, 6, std::vector<double>(24, 1.0));
  CHECK_THROWS_AS(fit_monotonous_nmf(z, 0, {}), std::invalid_argument);
  CHECK_THROWS_AS(fit_monotonous_nmf(z, 5, all_increasing(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_monotonous_nmf(z, 2, all_increasing(3)),
                  std::invalid_argument);
  FitOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(fit_monotonous_nmf(z, 2, all_increasing(2), bad),
                  std::invalid_argument);
}

TEST_CASE("fit_monotonous_nmf recovers a single increasing source") {
  std::mt19937_64 rng(29);
  const Index n = 6, m = 30;
  Eigen::MatrixXd h0(1, m);
  for (Index j = 0; j < m; ++j)
    h0(0, j) = static_cast<double>(j + 1) / static_cast<double>(m);
  Eigen::MatrixXd w0 = random_uniform(n, 1, rng, 0.2, 1.0);
  DenseMatrix z = DenseMatrix::from_eigen(w0 * h0);

  FitOptions opts;
  opts.seed = 1;
  FactorResult fit = fit_monotonous_nmf(z, 1, all_increasing(1), opts);

  CHECK(fit.objective_trace.back() <= 1e-6 * (1.0 + z.view().norm()));
  CHECK(pattern_feasible(fit.h.eigen(), all_increasing(1)));
  // Max-normalized factors match the planted pair up to the shared scale.
  Eigen::VectorXd est = fit.h.view().row(0).transpose();
  Eigen::VectorXd truth = h0.row(0).transpose() / h0.row(0).maxCoeff();
  CHECK((est - truth).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("fit handles the zero matrix") {
  DenseMatrix z(3, 5, std::vector<double>(15, 0.0));
  FactorResult fit = fit_monotonous_nmf(z, 2, all_increasing(2));
  CHECK(fit.objective_trace.back() == 0.0);
  CHECK(fit.w.view().cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.termination == Termination::converged);
}

TEST_CASE("fit_monotonous_nmf warns on negative data instead of failing") {
  DenseMatrix z(2, 4, {1.0, 2.0, 3.0, 4.0, -0.5, 0.5, 1.0, 2.0});
  FitOptions opts;
  opts.max_outer_iter = 20;
  FactorResult fit = fit_monotonous_nmf(z, 1, all_increasing(1), opts);
  REQUIRE_FALSE(fit.diagnostics.empty());
  CHECK(fit.diagnostics.front().find("negative") != std::string::npos);
  CHECK((fit.w.view().array() >= 0.0).all());
}

TEST_CASE("fit descends monotonically with exactly feasible iterates") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const Index n = 6, m = 18, s = 2;
    Eigen::MatrixXd z = random_uniform(n, m, rng, 0.0, 1.0);
    MonotonicityPattern pattern{
        trial % 2 ? Direction::increasing : Direction::decreasing,
        Direction::increasing};

    FitOptions opts;
    opts.seed = 100 + static_cast<std::uint64_t>(trial);
    opts.max_outer_iter = 60;
    FactorResult fit =
        fit_monotonous_nmf(DenseMatrix::from_eigen(z), s, pattern, opts);

    CHECK(trace_non_increasing(fit.objective_trace, 1e-8));
    CHECK(pattern_feasible(fit.h.eigen(), pattern));
    CHECK((fit.w.view().array() >= 0.0).all());
    CHECK(fit.objective_trace.size() ==
          static_cast<std::size_t>(fit.outer_iterations));
  }
}

TEST_CASE("permuting the pattern with a permuted init gives the same objective") {
  std::mt19937_64 rng(37);
  const Index n = 7, m = 16, s = 3;
  Eigen::MatrixXd z = random_uniform(n, m, rng, 0.0, 1.0);
  MonotonicityPattern pattern{Direction::increasing, Direction::decreasing,
                              Direction::increasing};

  Eigen::MatrixXd w0 = random_uniform(n, s, rng, 0.0, 1.0);
  Eigen::MatrixXd h0 = random_uniform(s, m, rng, 0.0, 1.0);
  detail::project_rows(h0, pattern);

  const std::vector<Index> perm{2, 0, 1};
  MonotonicityPattern pattern_p(s);
  Eigen::MatrixXd w0p(n, s), h0p(s, m);
  for (Index k = 0; k < s; ++k) {
    pattern_p[static_cast<std::size_t>(k)] =
        pattern[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
    w0p.col(k) = w0.col(perm[static_cast<std::size_t>(k)]);
    h0p.row(k) = h0.row(perm[static_cast<std::size_t>(k)]);
  }

  FitOptions opts;
  opts.max_outer_iter = 40;
  opts.init_w = DenseMatrix::from_eigen(w0);
  opts.init_h = DenseMatrix::from_eigen(h0);
  FactorResult fit =
      fit_monotonous_nmf(DenseMatrix::from_eigen(z), s, pattern, opts);

  FitOptions opts_p = opts;
  opts_p.init_w = DenseMatrix::from_eigen(w0p);
  opts_p.init_h = DenseMatrix::from_eigen(h0p);
  FactorResult fit_p =
      fit_monotonous_nmf(DenseMatrix::from_eigen(z), s, pattern_p, opts_p);

  CHECK(fit.objective_trace.back() ==
        Catch::Approx(fit_p.objective_trace.back()).margin(1e-8));
}

TEST_CASE("fits are deterministic given the seed") {
  std::mt19937_64 rng(41);
  DenseMatrix z = random_matrix(6, 14, rng, 0.0, 1.0);
  FitOptions opts;
  opts.seed = 7;
  opts.max_outer_iter = 30;
  FactorResult a = fit_monotonous_nmf(z, 2, all_increasing(2), opts);
  FactorResult b = fit_monotonous_nmf(z, 2, all_increasing(2), opts);
  CHECK(a.w == b.w);
  CHECK(a.h == b.h);
  CHECK(a.objective_trace == b.objective_trace);
}
