// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select criteria by number.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "subexp/complexity.hpp"
#include "subexp/harness.hpp"

using namespace subexp;

namespace {

// Tolerances and limits.
constexpr double kExactRecoveryTol = 1e-5;
constexpr double kTunedSlopeLo = -0.65, kTunedSlopeHi = -0.35;
constexpr double kGlobalSlopeLo = -0.55, kGlobalSlopeHi = -0.15;
constexpr double kLiftedErrorTol = 0.1;
constexpr int kLiftedMinSuccesses = 8;
constexpr double kLiftedScaleTol = 0.01;
constexpr double kAlphaRelTol = 0.02;
constexpr double kOracleTol = 1e-8;
constexpr double kNormalEquationsTol = 1e-6;
constexpr double kDecompositionTol = 1e-10;
constexpr double kFormulaRelTol = 1e-3;
constexpr double kDudleyRatioCap = 8.0;
constexpr double kSigmas = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VectorXd gaussian_vector(Index p, Rng& rng) {
  VectorXd v(p);
  for (Index j = 0; j < p; ++j) v(j) = standard_normal(rng);
  return v;
}

VectorXd unit_vector(Index p, Rng& rng) {
  const VectorXd g = gaussian_vector(p, rng);
  return g / g.norm();
}

oracle::Vec to_vec(const VectorXd& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

ExperimentConfig sparse_linear(NoiseSpec noise, std::vector<Index> grid, int trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.master_seed = seed;
  cfg.spec = DistributionSpec::unit_variance(DistributionKind::laplace, 100);
  cfg.model.noise = noise;
  cfg.beta0_sparse = SparseBeta{5, 1.0, false};
  cfg.set.kind = SetKind::l1_ball;
  cfg.solver.tol = 1e-8;
  cfg.n_grid = std::move(grid);
  cfg.trials_per_n = trials;
  return cfg;
}

std::optional<SlopeFit> g_tuned_slope;

SlopeFit tuned_slope() {
  if (!g_tuned_slope) {
    ExperimentConfig cfg = sparse_linear(NoiseSpec::laplace_with_std(0.5), {200, 400, 800, 1600, 3200}, 30, 2);
    cfg.name = "tuned";
    g_tuned_slope = run_error_curve(cfg).decay;
  }
  return *g_tuned_slope;
}

Outcome exact_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = sparse_linear(NoiseSpec::none(), {400}, 20, 1);
  cfg.name = "exact";
  const auto res = run_error_curve(cfg);
  double worst = 0.0;
  for (const auto& r : res.records) worst = std::max(worst, r.error);
  const double secs = seconds_since(t0);
  return {worst < kExactRecoveryTol && res.records.size() == 20 && secs < 60.0,
          fmt("max error %.3g over %zu trials (< %.0e), %.1f s (< 60 s)", worst, res.records.size(),
              kExactRecoveryTol, secs)};
}

Outcome tuned_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const SlopeFit s = tuned_slope();
  const double secs = seconds_since(t0);
  return {s.slope >= kTunedSlopeLo && s.slope <= kTunedSlopeHi && secs < 600.0,
          fmt("slope %.3f +- %.3f in [%.2f, %.2f], %.1f s (< 600 s)", s.slope, s.std_error, kTunedSlopeLo,
              kTunedSlopeHi, secs)};
}

Outcome global_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = sparse_linear(NoiseSpec::laplace_with_std(0.5), {200, 400, 800, 1600, 3200}, 30, 3);
  cfg.name = "untuned";
  cfg.set.radius = std::sqrt(5.0);
  const SlopeFit g = *run_error_curve(cfg).decay;
  const double secs = seconds_since(t0);
  const SlopeFit t = tuned_slope();
  const bool disjoint = t.slope + 2.0 * t.std_error < g.slope - 2.0 * g.std_error;
  const bool shallower = disjoint || t.slope < g.slope;
  return {g.slope >= kGlobalSlopeLo && g.slope <= kGlobalSlopeHi && shallower && secs < 600.0,
          fmt("slope %.3f +- %.3f in [%.2f, %.2f]; tuned %.3f +- %.3f (%s), %.1f s", g.slope, g.std_error,
              kGlobalSlopeLo, kGlobalSlopeHi, t.slope, t.std_error,
              disjoint ? "intervals disjoint" : (shallower ? "tuned steeper" : "not shallower"), secs)};
}

Outcome mismatch_consistency() {
  ExperimentConfig cfg;
  cfg.name = "tanh";
  cfg.master_seed = 4;
  cfg.spec = DistributionSpec::unit_variance(DistributionKind::gaussian, 50);
  cfg.model.kind = ModelKind::single_index;
  cfg.model.link = Link::tanh;
  cfg.beta0_sparse = SparseBeta{5, 1.0, false};
  cfg.target.kind = TargetRuleKind::mu_beta0;
  cfg.target.mc_budget = 10000000;
  cfg.set.kind = SetKind::l1_ball;
  cfg.n_grid = {400, 3200};
  cfg.trials_per_n = 30;
  materialize_beta0(cfg);
  const auto res = run_error_curve(cfg);
  const double m400 = res.aggregates[0].median;
  const double m3200 = res.aggregates[1].median;
  const auto rep = mismatch_report(cfg.model, cfg.spec, res.beta_nat, nullptr, std::nullopt, 1000000, 5);
  const double allowance = kSigmas * rep.mc_std_error_rms * std::sqrt(50.0);
  return {m3200 < 0.5 * m400 && rep.rho_global < allowance,
          fmt("median %.4g at n=3200 vs %.4g at n=400 (ratio %.3f < 0.5); rho_global %.3g < %.3g",
              m3200, m400, m3200 / m400, rep.rho_global, allowance)};
}

Outcome lifted_phase_retrieval() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.name = "phase_retrieval";
  cfg.master_seed = 5;
  cfg.spec = DistributionSpec::unit_variance(DistributionKind::gaussian, 10);
  cfg.model.kind = ModelKind::lifted_view;
  cfg.beta0_sparse = SparseBeta{10, 1.0, false};
  cfg.set.kind = SetKind::lifted_psd_fro;
  cfg.estimator = Estimator::lifted;
  cfg.solver.tol = 1e-8;
  cfg.solver.max_iters = 5000;
  cfg.n_grid = {600};
  cfg.trials_per_n = 10;
  const auto res = run_error_curve(cfg);
  int ok = 0;
  double worst = 0.0;
  for (const auto& r : res.records) {
    ok += r.error < kLiftedErrorTol;
    worst = std::max(worst, r.error);
  }
  const double secs = seconds_since(t0);
  return {ok >= kLiftedMinSuccesses && secs < 300.0,
          fmt("%d/10 trials below %.2f (need %d), worst %.3g, %.1f s (< 300 s)", ok, kLiftedErrorTol,
              kLiftedMinSuccesses, worst, secs)};
}

Outcome lifted_even_link() {
  const auto sq = lifted_target_scale(Link::square, 10000000, 6);
  const auto id = lifted_target_scale(Link::identity, 10000000, 7);
  return {std::abs(sq.value - 1.0) <= kLiftedScaleTol && std::abs(id.value) <= kLiftedScaleTol,
          fmt("square %.5f (1 +- %.2f), identity %.5f (0 +- %.2f)", sq.value, kLiftedScaleTol, id.value,
              kLiftedScaleTol)};
}

Outcome width_sanity() {
  const auto w = gaussian_width(HypothesisSet::l2_ball(1, 1.0), 200000, 8);
  const double target = std::sqrt(2.0 / M_PI);
  const bool first = std::abs(w.mean - target) <= kSigmas * w.std_error;

  Rng rng(9);
  std::vector<Skeleton> skeletons;
  int identity_ok = 0;
  for (int s = 0; s < 5; ++s) {
    const Index p = 3 + static_cast<Index>(rng() % 10);
    std::vector<VectorXd> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(gaussian_vector(p, rng));
    skeletons.push_back(Skeleton::from_points(pts));
    const auto spec = DistributionSpec::unit_variance(DistributionKind::gaussian, p);
    const auto e = empirical_width(skeletons.back(), spec, 10, 20000, derive_seed(10, "emp", s));
    const auto g = gaussian_width(skeletons.back(), 20000, derive_seed(11, "gauss", s));
    identity_ok += std::abs(e.mean - g.mean) <= kSigmas * std::hypot(e.std_error, g.std_error);
  }

  int ratio_ok = 0;
  int ratio_total = 0;
  auto check_ratio = [&](const WidthEstimate& g, const WidthEstimate& e, Index p) {
    ++ratio_total;
    ratio_ok += e.mean <= 3.0 * std::sqrt(std::log(static_cast<double>(p))) * g.mean;
  };
  for (const auto& set : {HypothesisSet::l1_ball(16, 1.0), HypothesisSet::l2_ball(16, 1.0),
                          HypothesisSet::hypercube(8, 0.5), HypothesisSet::l1_ball(2, 3.0)}) {
    check_ratio(gaussian_width(set, 5000, 12), exponential_width(set, 5000, 13), set.ambient());
  }
  skeletons.push_back(sparse_skeleton_sampler(3, 40, 2000, 14));
  for (const auto& sk : skeletons) check_ratio(gaussian_width(sk, 5000, 15), exponential_width(sk, 5000, 16), sk.dimension());

  return {first && identity_ok == 5 && ratio_ok == ratio_total,
          fmt("w(l2, p=1) %.5f vs %.5f (se %.2g); identity %d/5; exp <= 3 sqrt(log p) gauss on %d/%d sets", w.mean,
              target, w.std_error, identity_ok, ratio_ok, ratio_total)};
}

Outcome paley_zygmund() {
  Rng rng(17);
  std::vector<VectorXd> dirs;
  for (int i = 0; i < 200; ++i) dirs.push_back(unit_vector(5, rng));
  const auto spec = DistributionSpec::unit_variance(DistributionKind::gaussian, 5);
  const auto sb = small_ball_report(spec, dirs, ThetaRule::paley_zygmund(), 100000, 18);
  const double tau = sb.tau.value_or(0.0);
  const double lhs = tau * sb.q_hat;
  const double rhs = sb.pz_bound - kSigmas * (tau * sb.q_std_error + sb.pz_std_error);
  const double target = std::sqrt(2.0 / M_PI);
  const double rel = std::abs(sb.alpha_hat - target) / target;
  return {lhs >= rhs && rel <= kAlphaRelTol && !sb.degenerate,
          fmt("tau q = %.4f >= %.4f (pz %.4f); alpha %.4f, %.2f%% from sqrt(2/pi)", lhs, rhs, sb.pz_bound,
              sb.alpha_hat, 100.0 * rel)};
}

Outcome tail_soundness() {
  Rng rng(19);
  MatrixXd mix(5, 5);
  for (Index j = 0; j < 5; ++j) mix.col(j) = gaussian_vector(5, rng) / std::sqrt(5.0);
  const std::vector<DistributionSpec> specs = {DistributionSpec::unit_variance(DistributionKind::gaussian, 5),
                                               DistributionSpec::unit_variance(DistributionKind::rademacher, 5),
                                               DistributionSpec::unit_variance(DistributionKind::laplace, 5),
                                               DistributionSpec::mixed_from(DistributionKind::laplace, mix,
                                                                            unit_variance_scale(DistributionKind::laplace))};
  const std::vector<double> ts = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  std::size_t violations = 0;
  int checks = 0;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto c = sufficient_tail_constants(specs[s]);
    const auto profile = profile_for(specs[s]).with_constants(c.g, c.e);
    for (int d = 0; d < 20; ++d) {
      const auto rep = verify_bernstein_tail(specs[s], profile, unit_vector(5, rng), ts, 100000,
                                             derive_seed(20, "tail", s * 100 + static_cast<std::size_t>(d)));
      violations += rep.violations;
      ++checks;
    }
  }
  return {violations == 0, fmt("%zu violations over %d (spec, direction) pairs x %zu thresholds", violations, checks,
                               ts.size())};
}

Outcome oracle_equivalence() {
  Rng rng(21);
  double proj_err = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Index p = 1 + static_cast<Index>(rng() % 6);
    const double r = 0.2 + 2.0 * uniform01(rng);
    const VectorXd v = 2.0 * gaussian_vector(p, rng);
    const VectorXd c = 0.5 * gaussian_vector(p, rng);
    const auto l1 = oracle::l1_projection_bisect(to_vec(v), r);
    const auto l2 = oracle::l2_projection_bisect(to_vec(v), r, to_vec(c));
    const auto bx = oracle::box_projection_search(to_vec(v), r);
    const VectorXd a = HypothesisSet::l1_ball(p, r).project(v);
    const VectorXd b = HypothesisSet::l2_ball(p, r, c).project(v);
    const VectorXd h = HypothesisSet::hypercube(p, r).project(v);
    for (Index j = 0; j < p; ++j) {
      const auto k = static_cast<std::size_t>(j);
      proj_err = std::max({proj_err, std::abs(a(j) - l1[k]), std::abs(b(j) - l2[k]), std::abs(h(j) - bx[k])});
    }
  }

  double ne_err = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Index p = 2 + static_cast<Index>(rng() % 6);
    const Index n = 3 * p + static_cast<Index>(rng() % 20);
    Dataset ds;
    ds.inputs = MatrixXd(n, p);
    for (Index i = 0; i < ds.inputs.size(); ++i) ds.inputs.data()[i] = standard_normal(rng);
    ds.outputs = ds.inputs * gaussian_vector(p, rng) + 0.3 * gaussian_vector(n, rng);
    ds.base_dim = p;
    oracle::Mat rows(static_cast<std::size_t>(n), oracle::Vec(static_cast<std::size_t>(p)));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = ds.inputs(i, j);
    }
    const auto ref = oracle::normal_equations(rows, to_vec(ds.outputs));
    SolverConfig sc;
    sc.seed = static_cast<std::uint64_t>(rep);
    const SolveResult r = solve_lasso(ds, HypothesisSet::l2_ball(p, 1e6), sc);
    for (Index j = 0; j < p; ++j) ne_err = std::max(ne_err, std::abs(r.estimate(j) - ref[static_cast<std::size_t>(j)]));
  }

  ObservationModel m;
  m.beta0 = gaussian_vector(4, rng);
  m.noise = NoiseSpec::gaussian(0.5);
  const Dataset noisy = generate_dataset(m, DistributionSpec::unit_variance(DistributionKind::laplace, 4), 30, 22);
  double dec_err = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const VectorXd b = gaussian_vector(4, rng);
    const VectorXd nat = gaussian_vector(4, rng);
    const double direct = empirical_risk(noisy, b) - empirical_risk(noisy, nat);
    dec_err = std::max(dec_err, std::abs(excess_decomposition(noisy, b, nat).excess() - direct) /
                                    std::max(1.0, std::abs(direct)));
  }
  return {proj_err <= kOracleTol && ne_err <= kNormalEquationsTol && dec_err <= kDecompositionTol,
          fmt("projections %.2g (<= %.0e); normal equations %.2g (<= %.0e); Q + M = E %.2g (<= %.0e)", proj_err,
              kOracleTol, ne_err, kNormalEquationsTol, dec_err, kDecompositionTol)};
}

Outcome certificate_coherence() {
  int positives = 0;
  int incoherent = 0;
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(23, "instance", static_cast<std::uint64_t>(inst)));
    const Index p = 2 + static_cast<Index>(rng() % 4);
    const Index n = 8 + static_cast<Index>(rng() % 30);
    ObservationModel m;
    m.beta0 = gaussian_vector(p, rng);
    m.noise = NoiseSpec::laplace_with_std(0.3);
    const Dataset ds = generate_dataset(m, DistributionSpec::unit_variance(DistributionKind::laplace, p), n,
                                        derive_seed(24, "data", static_cast<std::uint64_t>(inst)));
    const auto set = HypothesisSet::l1_ball(p, m.beta0.lpNorm<1>());
    const double t = 0.05 + 0.5 * uniform01(rng);
    const auto rep = excess_certificate(ds, set, m.beta0, t, 1000, static_cast<std::uint64_t>(inst));
    if (rep.positive) {
      ++positives;
      incoherent += !rep.coherent.value_or(false);
    }
  }
  return {incoherent == 0 && positives > 0,
          fmt("%d positive certificates over 100 instances, %d with solver error >= t", positives, incoherent)};
}

Outcome formula_bounds() {
  struct Check {
    const char* name;
    double got;
    double want;
  };
  const double c = coordinate_psi_proxy(DistributionKind::gaussian, 1.0, 2);
  const auto gprof = profile_for(DistributionSpec::unit_variance(DistributionKind::gaussian, 6));
  const auto lprof =
      profile_for(DistributionSpec::unit_variance(DistributionKind::laplace, 6), ProfileVariant::uniform_subexponential);
  const double ce = lprof.e(VectorXd::Unit(6, 0));
  const auto l1 = HypothesisSet::l1_ball(6, 1.5);
  std::vector<VectorXd> axes;
  for (Index j = 0; j < 5; ++j) {
    axes.push_back(0.7 * VectorXd::Unit(5, j));
    axes.push_back(-0.7 * VectorXd::Unit(5, j));
  }
  const auto euclid = SemiNorm::euclidean_scaled(1.0);
  const std::vector<Check> checks = {
      {"sparse (0,2)-q k=4 p=256 n=1e4", sparse_cone_bound(4, 256, 10000, SparseRegime::subexp_02_q).value, 4.2458},
      {"sparse (2,0) k=p/2", sparse_cone_bound(8, 16, 100, SparseRegime::subgaussian_20).value, std::sqrt(8.0 * std::log(2.0))},
      {"polytope m, sub-gaussian", polytope_complexity(l1, gprof, 100).m_bound, 3.0 * c * std::sqrt(std::log(12.0))},
      {"polytope m, uniform sub-exp", polytope_complexity(l1, lprof, 100).m_bound, 3.0 * ce * std::log(12.0)},
      {"finite gamma, pair", finite_gamma_bound(Skeleton::from_points({VectorXd{{1.0, 0.0}}, VectorXd{{-1.0, 0.0}}}), 2, euclid), 1.665},
      {"finite gamma, axes", finite_gamma_bound(Skeleton::from_points(axes), 1, euclid), 1.4 * std::log(10.0)},
      {"dudley alpha=1 k=p=1", dudley_sparse_bound(1, 1, 1), 3.0 * (std::log(9.0) + 1.0)},
  };
  int ok = 0;
  double worst = 0.0;
  for (const auto& ch : checks) {
    const double rel = std::abs(ch.got - ch.want) / std::abs(ch.want);
    worst = std::max(worst, rel);
    ok += rel <= kFormulaRelTol;
  }
  const bool single = polytope_complexity(HypothesisSet::polytope(std::vector<VectorXd>{VectorXd::Ones(6)}), gprof, 10).m_bound == 0.0;

  double hi = 0.0;
  for (Index k = 1; k <= 8; ++k) {
    for (Index p = 16; p <= 1024; p *= 2) {
      hi = std::max(hi, dudley_sparse_bound(k, p, 2) /
                            std::sqrt(static_cast<double>(k) * std::log(static_cast<double>(p) / static_cast<double>(k))));
    }
  }
  return {ok == static_cast<int>(checks.size()) && single && hi <= kDudleyRatioCap,
          fmt("%d/%zu hand values within %.0e (worst %.2g); D=1 gives 0: %s; max dudley ratio %.3f <= %.1f", ok,
              checks.size(), kFormulaRelTol, worst, single ? "yes" : "no", hi, kDudleyRatioCap)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "exact recovery", exact_recovery},
      {2, "decay rate, tuned", tuned_decay},
      {3, "decay rate, untuned", global_decay},
      {4, "mismatch consistency", mismatch_consistency},
      {5, "lifted phase retrieval", lifted_phase_retrieval},
      {6, "lifted even-link target", lifted_even_link},
      {7, "width sanity", width_sanity},
      {8, "paley-zygmund", paley_zygmund},
      {9, "tail soundness", tail_soundness},
      {10, "oracle equivalence", oracle_equivalence},
      {11, "certificate coherence", certificate_coherence},
      {12, "formula bounds", formula_bounds},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d  %-26s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
