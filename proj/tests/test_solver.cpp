#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "subexp/errors.hpp"
#include "subexp/solver.hpp"

using namespace subexp;

namespace {

VectorXd gaussian_vector(Index p, Rng& rng) {
  VectorXd v(p);
  for (Index j = 0; j < p; ++j) v(j) = standard_normal(rng);
  return v;
}

Dataset make_dataset(const MatrixXd& x, const VectorXd& y) {
  Dataset ds;
  ds.inputs = x;
  ds.outputs = y;
  ds.base_dim = x.cols();
  return ds;
}

Dataset linear_dataset(DistributionKind kind, const VectorXd& beta, Index n, std::uint64_t seed,
                       NoiseSpec noise = NoiseSpec::none()) {
  ObservationModel m;
  m.beta0 = beta;
  m.noise = noise;
  return generate_dataset(m, DistributionSpec::unit_variance(kind, beta.size()), n, seed);
}

VectorXd sparse_vector(Index p, Index k, Rng& rng) {
  VectorXd b = VectorXd::Zero(p);
  for (Index j = 0; j < k; ++j) b((j * 7 + 3) % p) = standard_normal(rng);
  return b / b.norm();
}

oracle::Mat rows_of(const MatrixXd& x) {
  oracle::Mat out(static_cast<std::size_t>(x.rows()), oracle::Vec(static_cast<std::size_t>(x.cols())));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
  }
  return out;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("empirical risk examples") {
  MatrixXd x(1, 2);
  x << 1.0, 0.0;
  CHECK(empirical_risk(x, VectorXd{{2.0}}, VectorXd::Zero(2)) == 4.0);
  Rng rng(1);
  const VectorXd beta = gaussian_vector(3, rng);
  const Dataset ds = linear_dataset(DistributionKind::gaussian, beta, 20, 2);
  CHECK(empirical_risk(ds, beta) < 1e-28);
  CHECK_THROWS_AS(empirical_risk(ds, VectorXd::Zero(4)), DimensionError);
}

TEST_CASE("empirical risk matches an independent accumulation") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 5 + static_cast<Index>(rng() % 30);
    const Index p = 1 + static_cast<Index>(rng() % 8);
    MatrixXd x(n, p);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    const VectorXd y = gaussian_vector(n, rng);
    const VectorXd b = gaussian_vector(p, rng);
    const auto rows = rows_of(x);
    long double acc = 0.0L;
    for (Index i = 0; i < n; ++i) {
      const long double r = y(i) - oracle::dot(rows[static_cast<std::size_t>(i)], oracle::Vec(b.data(), b.data() + p));
      acc += r * r;
    }
    CHECK(empirical_risk(x, y, b) == doctest::Approx(static_cast<double>(acc / n)).epsilon(1e-12));
  }
}

TEST_CASE("excess decomposition") {
  Rng rng(4);
  const VectorXd beta = gaussian_vector(4, rng);
  const Dataset noisy = linear_dataset(DistributionKind::laplace, beta, 30, 5, NoiseSpec::gaussian(0.5));
  const auto zero = excess_decomposition(noisy, beta, beta);
  CHECK(zero.quadratic == 0.0);
  CHECK(zero.multiplier == 0.0);

  const Dataset clean = linear_dataset(DistributionKind::laplace, beta, 30, 6);
  const VectorXd other = gaussian_vector(4, rng);
  const auto d = excess_decomposition(clean, other, beta);
  CHECK(std::abs(d.multiplier) < 1e-14);
  CHECK(d.quadratic == doctest::Approx(empirical_risk(clean, other)).epsilon(1e-12));

  for (int rep = 0; rep < 1000; ++rep) {
    const VectorXd b = gaussian_vector(4, rng);
    const VectorXd nat = gaussian_vector(4, rng);
    const auto e = excess_decomposition(noisy, b, nat);
    CHECK(e.quadratic >= 0.0);
    const double direct = empirical_risk(noisy, b) - empirical_risk(noisy, nat);
    CHECK(std::abs(e.excess() - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("lipschitz constant by power iteration") {
  Rng rng(7);
  MatrixXd x(40, 5);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  const MatrixXd g = 2.0 / 40.0 * x.transpose() * x;
  oracle::Mat gm(5, oracle::Vec(5));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) gm[i][j] = g(i, j);
  }
  const double top = oracle::jacobi_top_eigenpair(gm).value;
  CHECK(lipschitz_constant(x, 1) == doctest::Approx(top).epsilon(1e-6));
}

TEST_CASE("huge ball reproduces the normal equations") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const Index p = 2 + static_cast<Index>(rng() % 6);
    const Index n = 3 * p + static_cast<Index>(rng() % 20);
    MatrixXd x(n, p);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    const VectorXd y = x * gaussian_vector(p, rng) + 0.3 * gaussian_vector(n, rng);
    const auto ref = oracle::normal_equations(rows_of(x), oracle::Vec(y.data(), y.data() + n));
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(rep);
    const SolveResult r = solve_lasso(make_dataset(x, y), HypothesisSet::l2_ball(p, 1e6), cfg);
    CHECK(r.converged);
    for (Index j = 0; j < p; ++j) CHECK(std::abs(r.estimate(j) - ref[static_cast<std::size_t>(j)]) < 1e-6);
  }
}

TEST_CASE("orthonormal design reduces to a projection") {
  MatrixXd x = MatrixXd::Identity(2, 2);
  const SolveResult r = solve_lasso(make_dataset(x, VectorXd{{1.0, 2.0}}), HypothesisSet::l1_ball(2, 1.0), {});
  CHECK(std::abs(r.estimate(0)) < 1e-8);
  CHECK(r.estimate(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("noiseless sparse recovery with a tuned l1 ball") {
  Rng rng(9);
  const VectorXd beta = sparse_vector(50, 3, rng);
  const Dataset ds = linear_dataset(DistributionKind::laplace, beta, 200, 10);
  const SolveResult r = solve_lasso(ds, HypothesisSet::l1_ball(50, beta.lpNorm<1>()), {});
  CHECK((r.estimate - beta).norm() < 1e-5);
}

TEST_CASE("solver invariants") {
  Rng rng(11);
  const VectorXd beta = sparse_vector(30, 4, rng);
  const Dataset ds = linear_dataset(DistributionKind::laplace, beta, 80, 12, NoiseSpec::laplace_with_std(0.5));
  MatrixXd verts(30, 40);
  for (Index j = 0; j < 40; ++j) verts.col(j) = 0.5 * gaussian_vector(30, rng);
  const std::vector<HypothesisSet> sets = {HypothesisSet::l1_ball(30, 0.8), HypothesisSet::l2_ball(30, 0.5),
                                           HypothesisSet::hypercube(30, 0.1), HypothesisSet::polytope(verts)};
  for (const auto& set : sets) {
    CAPTURE(set.describe());
    for (StepRule rule : {StepRule::fixed_inverse_lipschitz, StepRule::backtracking}) {
      SolverConfig cfg;
      cfg.step_rule = rule;
      cfg.record_trace = true;
      cfg.max_iters = 100000;
      const SolveResult r = solve_lasso(ds, set, cfg);
      CHECK(r.converged);
      CHECK(set.contains(r.estimate, 1e-8));
      CHECK(r.objective == doctest::Approx(empirical_risk(ds, r.estimate)).epsilon(1e-12));
      CHECK(r.fixed_point_residual < 10.0 * cfg.tol * (1.0 + r.estimate.norm()));
      if (rule == StepRule::fixed_inverse_lipschitz) {
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
          CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] * (1.0 + 1e-14));
        }
      }
    }
  }
}

TEST_CASE("restarts do not change the optimum") {
  Rng rng(13);
  const VectorXd beta = sparse_vector(20, 3, rng);
  const Dataset ds = linear_dataset(DistributionKind::gaussian, beta, 60, 14, NoiseSpec::gaussian(0.2));
  SolverConfig one;
  SolverConfig three;
  three.restart_count = 3;
  const auto set = HypothesisSet::l1_ball(20, 1.0);
  const SolveResult a = solve_lasso(ds, set, one);
  const SolveResult b = solve_lasso(ds, set, three);
  CHECK(b.objective <= a.objective + 1e-12);
  CHECK((a.estimate - b.estimate).norm() < 1e-6);
}

TEST_CASE("invalid inputs") {
  MatrixXd x = MatrixXd::Ones(3, 2);
  VectorXd y = VectorXd::Ones(3);
  y(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_lasso(make_dataset(x, y), HypothesisSet::l1_ball(2, 1.0), {}), ConfigError);
  CHECK_THROWS_AS(solve_lasso(make_dataset(x, VectorXd::Ones(3)), HypothesisSet::l1_ball(3, 1.0), {}),
                  DimensionError);
  SolverConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("non-convergence is reported, not thrown") {
  Rng rng(15);
  const VectorXd beta = sparse_vector(40, 4, rng);
  const Dataset ds = linear_dataset(DistributionKind::laplace, beta, 100, 16, NoiseSpec::gaussian(0.3));
  SolverConfig cfg;
  cfg.max_iters = 2;
  const SolveResult r = solve_lasso(ds, HypothesisSet::l1_ball(40, 1.0), cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 2);
}

TEST_CASE("lifted solve on interpolating data reaches zero") {
  const auto spec = DistributionSpec::unit_variance(DistributionKind::gaussian, 3);
  const MatrixXd x = sample_inputs(spec, 60, 17);
  const VectorXd beta{{0.6, 0.0, 0.8}};
  const MatrixXd lifts = lift_rows(x, MatrixXd::Identity(3, 3));
  const MatrixXd bn = beta * beta.transpose();
  Dataset ds = make_dataset(lifts, lifts * Eigen::Map<const VectorXd>(bn.data(), 9));
  ds.lifted = true;
  ds.base_dim = 3;
  const auto set = HypothesisSet::lifted_psd_fro(3, 1.0);
  CHECK(empirical_risk(ds, Eigen::Map<const VectorXd>(bn.data(), 9)) < 1e-28);
  const double initial = empirical_risk(ds, set.project(VectorXd::Zero(9)));
  const SolveResult r = solve_lifted(ds, set, {});
  CHECK(r.objective <= 1e-6 * initial);
  CHECK(r.matrix_dim == 3);
  CHECK((r.estimate_matrix() - bn).norm() < 1e-3);
}

TEST_CASE("lifted solve on 2x2 quadratic data matches a dense grid oracle") {
  ObservationModel m;
  m.kind = ModelKind::lifted_view;
  m.beta0 = VectorXd{{1.0, 0.0}};
  const Dataset ds = generate_dataset(m, DistributionSpec::unit_variance(DistributionKind::gaussian, 2), 50, 18);
  const auto set = HypothesisSet::lifted_psd_fro(2, 1.0);
  const SolveResult r = solve_lifted(ds, set, {});

  // Objective in (a, b, c) for B = [[a, b], [b, c]] as an explicit quadratic.
  double g[3][3] = {};
  double lin[3] = {};
  double yy = 0.0;
  for (Index i = 0; i < ds.size(); ++i) {
    const double f[3] = {ds.inputs(i, 0), ds.inputs(i, 1) + ds.inputs(i, 2), ds.inputs(i, 3)};
    for (int u = 0; u < 3; ++u) {
      lin[u] += f[u] * ds.outputs(i);
      for (int w = 0; w < 3; ++w) g[u][w] += f[u] * f[w];
    }
    yy += ds.outputs(i) * ds.outputs(i);
  }
  auto obj = [&](double a, double b, double c) {
    const double z[3] = {a, b, c};
    double q = yy;
    for (int u = 0; u < 3; ++u) {
      q -= 2.0 * z[u] * lin[u];
      for (int w = 0; w < 3; ++w) q += z[u] * g[u][w] * z[w];
    }
    return q / static_cast<double>(ds.size());
  };
  double best = std::numeric_limits<double>::infinity();
  double ba = 0.0, bb = 0.0, bc = 0.0;
  const double h = 0.002;
  for (double a = 0.0; a <= 1.0 + 1e-12; a += h) {
    for (double c = 0.0; a * a + c * c <= 1.0 + 1e-12; c += h) {
      const double lim = std::min(std::sqrt(a * c), std::sqrt(std::max(0.0, (1.0 - a * a - c * c) / 2.0)));
      for (double b = -lim; b <= lim + 1e-12; b += h) {
        const double v = obj(a, b, c);
        if (v < best) {
          best = v;
          ba = a;
          bb = b;
          bc = c;
        }
      }
    }
  }
  const MatrixXd b_hat = r.estimate_matrix();
  CHECK(r.objective <= best + 1e-12);
  CHECK(std::hypot(std::hypot(b_hat(0, 0) - ba, b_hat(1, 1) - bc), std::sqrt(2.0) * (b_hat(0, 1) - bb)) < 1e-2);
  CHECK(std::abs(b_hat(0, 1) - b_hat(1, 0)) < 1e-10);
  CHECK(set.contains(r.estimate, 1e-8));
}

TEST_CASE("rank-one extraction") {
  const VectorXd u = VectorXd{{1.0, -2.0, 2.0}} / 3.0;
  const Rank1 a = rank1_extract(2.0 * u * u.transpose());
  CHECK(a.lambda1 == doctest::Approx(2.0));
  CHECK((a.beta_unit - u).norm() < 1e-8);  // largest coordinate made positive: u has +2/3 at index 2
  const Rank1 d = rank1_extract(Eigen::DiagonalMatrix<double, 2>(3.0, 1.0).toDenseMatrix());
  CHECK(d.lambda1 == doctest::Approx(3.0));
  CHECK((d.beta_unit - VectorXd{{1.0, 0.0}}).norm() < 1e-8);
  const Rank1 z = rank1_extract(MatrixXd::Zero(3, 3));
  CHECK(z.degenerate);
  CHECK(z.lambda1 == 0.0);
  CHECK(z.beta_unit.norm() == doctest::Approx(1.0));
}

TEST_CASE("rank-one extraction matches a Jacobi eigensolver") {
  Rng rng(19);
  for (int rep = 0; rep < 50; ++rep) {
    MatrixXd a(5, 5);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
    const MatrixXd b = a * a.transpose();
    oracle::Mat bm(5, oracle::Vec(5));
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) bm[i][j] = b(i, j);
    }
    const auto ref = oracle::jacobi_top_eigenpair(bm);
    const Rank1 r = rank1_extract(b);
    CHECK(std::abs(r.lambda1 - ref.value) < 1e-8 * std::max(1.0, ref.value));
    VectorXd v = Eigen::Map<const VectorXd>(ref.vector.data(), 5);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    CHECK((r.beta_unit - v).norm() < 1e-8);
  }
}

TEST_CASE("sign-invariant error") {
  const VectorXd b{{0.3, -1.2}};
  CHECK(sign_invariant_error(-b, b) == 0.0);
  CHECK(sign_invariant_error(b, b) == 0.0);
  CHECK(sign_invariant_error(VectorXd{{1.0, 0.0}}, VectorXd{{0.0, 1.0}}) == doctest::Approx(std::sqrt(2.0)));
}

}  // TEST_SUITE
