#include "subexp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "subexp/config.hpp"
#include "subexp/errors.hpp"
#include "subexp/parallel.hpp"

namespace subexp {

std::string to_string(TargetRuleKind kind) {
  switch (kind) {
    case TargetRuleKind::beta0: return "beta0";
    case TargetRuleKind::mu_beta0: return "mu_beta0";
    case TargetRuleKind::erm_mc: return "erm_mc";
    case TargetRuleKind::explicit_vector: return "explicit";
  }
  return "unknown";
}

std::string to_string(Estimator e) { return e == Estimator::lifted ? "lifted" : "lasso"; }

void ExperimentConfig::validate() const {
  spec.validate();
  solver.validate();
  if (!beta0_sparse) model.validate(spec.dimension);
  if (beta0_sparse && (beta0_sparse->k < 1 || beta0_sparse->k > spec.dimension)) {
    throw ConfigError("sparse beta0 needs 1 <= k <= p");
  }
  if (trials_per_n < 1) throw ConfigError("trials_per_n must be >= 1");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("n_grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
  }
  if (estimator == Estimator::lifted) {
    if (set.kind != SetKind::lifted_psd_fro) throw ConfigError("lifted estimator needs a lifted_psd_fro set");
    if (model.kind != ModelKind::lifted_view) throw ConfigError("lifted estimator needs a lifted_view model");
  } else if (set.kind == SetKind::lifted_psd_fro || model.kind == ModelKind::lifted_view) {
    throw ConfigError("lifted sets and models need estimator: lifted");
  }
  if (set.radius && !(*set.radius > 0.0)) throw ConfigError("set radius must be positive");
  if (!(set.tuned_factor > 0.0)) throw ConfigError("tuned factor must be positive");
  if (target.kind == TargetRuleKind::explicit_vector && target.value.size() != spec.dimension) {
    throw ConfigError("explicit target has wrong dimension");
  }
}

void materialize_beta0(ExperimentConfig& cfg) {
  if (!cfg.beta0_sparse) return;
  const SparseBeta& sb = *cfg.beta0_sparse;
  const Index p = cfg.spec.dimension;
  if (sb.k < 1 || sb.k > p) throw ConfigError("sparse beta0 needs 1 <= k <= p");
  Rng rng(derive_seed(cfg.master_seed, "beta0"));
  std::vector<Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index j = 0; j < sb.k; ++j) {
    const Index r = j + static_cast<Index>(rng() % static_cast<std::uint64_t>(p - j));
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(r)]);
  }
  VectorXd b = VectorXd::Zero(p);
  for (Index j = 0; j < sb.k; ++j) {
    b(idx[static_cast<std::size_t>(j)]) = sb.equal_magnitudes ? random_sign(rng) : standard_normal(rng);
  }
  cfg.model.beta0 = sb.norm * b / b.norm();
}

namespace {

VectorXd erm_mc_target(const ExperimentConfig& cfg) {
  const Index p = cfg.spec.dimension;
  if (p > 12) throw ConfigError("erm_mc target rule is limited to p <= 12");
  if (!cfg.set.radius && cfg.set.kind != SetKind::polytope) {
    throw ConfigError("erm_mc target needs an explicit set radius");
  }
  const Index m = static_cast<Index>(std::max<std::size_t>(cfg.target.mc_budget, 1000));
  const Dataset big = generate_dataset(cfg.model, cfg.spec, m, derive_seed(cfg.master_seed, "erm_mc"));
  const HypothesisSet set = resolve_set(cfg, VectorXd::Zero(p));

  std::vector<VectorXd> candidates;
  candidates.push_back(set.project(VectorXd::Zero(p)));
  candidates.push_back(set.project(big.inputs.transpose() * big.outputs / static_cast<double>(m)));
  if (set.polytopal()) {
    const MatrixXd v = set.vertices();
    for (Index j = 0; j < v.cols(); ++j) candidates.push_back(v.col(j));
  }
  VectorXd best = candidates.front();
  double best_obj = empirical_risk(big, best);
  for (const auto& c : candidates) {
    const double o = empirical_risk(big, c);
    if (o < best_obj) {
      best_obj = o;
      best = c;
    }
  }
  SolverConfig polish = cfg.solver;
  polish.tol = std::min(polish.tol, 1e-12);
  polish.max_iters = std::max(polish.max_iters, 50000);
  const SolveResult r = solve_lasso(big, set, polish);
  return r.objective <= best_obj ? r.estimate : best;
}

}  // namespace

VectorXd resolve_target(const ExperimentConfig& cfg) {
  const Index p = cfg.spec.dimension;
  switch (cfg.target.kind) {
    case TargetRuleKind::beta0: return cfg.model.beta0;
    case TargetRuleKind::mu_beta0: {
      const ScalarEstimate mu =
          target_scale_mu(cfg.model, cfg.spec, cfg.target.mc_budget, derive_seed(cfg.master_seed, "mu"));
      return mu.value * cfg.model.beta0;
    }
    case TargetRuleKind::erm_mc: return erm_mc_target(cfg);
    case TargetRuleKind::explicit_vector:
      if (cfg.target.value.size() != p) throw ConfigError("explicit target has wrong dimension");
      return cfg.target.value;
  }
  return cfg.model.beta0;
}

HypothesisSet resolve_set(const ExperimentConfig& cfg, const VectorXd& beta_nat) {
  const Index p = cfg.spec.dimension;
  const SetConfig& s = cfg.set;
  auto radius = [&](double tuned) {
    const double r = s.radius ? *s.radius : s.tuned_factor * tuned;
    if (!(r > 0.0)) throw ConfigError("tuned radius is zero; set an explicit radius");
    return r;
  };
  switch (s.kind) {
    case SetKind::l1_ball: return HypothesisSet::l1_ball(p, radius(beta_nat.lpNorm<1>()));
    case SetKind::l2_ball:
      return HypothesisSet::l2_ball(p, radius(beta_nat.norm()), s.center.size() ? s.center : VectorXd::Zero(p));
    case SetKind::hypercube: return HypothesisSet::hypercube(p, radius(beta_nat.cwiseAbs().maxCoeff()));
    case SetKind::polytope:
      if (s.vertices.rows() != p) throw ConfigError("polytope vertices have wrong dimension");
      return HypothesisSet::polytope(s.vertices);
    case SetKind::lifted_psd_fro: return HypothesisSet::lifted_psd_fro(p, radius(beta_nat.squaredNorm()));
  }
  throw ConfigError("unknown set kind");
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_text(cfg))));
  return buf;
}

// ---------------------------------------------------------------- aggregates

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty list");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records) {
  std::vector<Index> ns;
  for (const auto& r : records) {
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
  }
  std::sort(ns.begin(), ns.end());
  std::vector<Aggregate> out;
  for (Index n : ns) {
    std::vector<double> e;
    for (const auto& r : records) {
      if (r.n == n) e.push_back(r.error);
    }
    out.push_back({n, e.size(), quantile(e, 0.5), quantile(e, 0.25), quantile(e, 0.75)});
  }
  return out;
}

SlopeFit fit_decay_rate(const std::vector<Aggregate>& aggregates) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& a : aggregates) {
    if (a.median > 0.0 && a.n > 0) {
      lx.push_back(std::log(static_cast<double>(a.n)));
      ly.push_back(std::log(a.median));
    }
  }
  if (lx.size() < 3) throw ConfigError("decay fit needs at least 3 grid points with positive median error");
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  fit.std_error = std::sqrt(ssr / (m - 2.0) / sxx);
  fit.points = lx.size();
  return fit;
}

SlopeFit fit_decay_rate(const ExperimentResult& result) { return fit_decay_rate(result.aggregates); }

// ---------------------------------------------------------------- error curves

std::uint64_t trial_seed(std::uint64_t master, std::size_t n_index, int trial) {
  return derive_seed(master, "trial", (static_cast<std::uint64_t>(n_index) << 32) | static_cast<std::uint32_t>(trial));
}

Dataset trial_dataset(const ExperimentConfig& cfg, Index n, std::uint64_t seed) {
  return generate_dataset(cfg.model, cfg.spec, n, seed);
}

SolveResult solve_for(const ExperimentConfig& cfg, const Dataset& ds, const HypothesisSet& set,
                      std::uint64_t seed) {
  SolverConfig sc = cfg.solver;
  sc.seed = derive_seed(seed, "solver");
  return cfg.estimator == Estimator::lifted ? solve_lifted(ds, set, sc) : solve_lasso(ds, set, sc);
}

double trial_error(const ExperimentConfig& cfg, const SolveResult& r, const VectorXd& beta_nat) {
  if (cfg.estimator == Estimator::lifted) {
    const Rank1 top = rank1_extract(r.estimate_matrix());
    return sign_invariant_error(top.lambda1 * top.beta_unit, beta_nat);
  }
  return (r.estimate - beta_nat).norm();
}

ExperimentResult run_error_curve(const ExperimentConfig& input) {
  ExperimentConfig cfg = input;
  materialize_beta0(cfg);
  cfg.validate();
  if (cfg.n_grid.empty()) throw ConfigError("n_grid must be non-empty");

  ExperimentResult res;
  res.experiment = cfg.name;
  res.config_hash = config_hash(cfg);
  res.beta_nat = resolve_target(cfg);
  const HypothesisSet set = resolve_set(cfg, res.beta_nat);

  const std::size_t trials = static_cast<std::size_t>(cfg.trials_per_n);
  res.records.resize(cfg.n_grid.size() * trials);
  parallel_for(res.records.size(), [&](std::size_t idx) {
    const std::size_t ni = idx / trials;
    const int trial = static_cast<int>(idx % trials);
    const Index n = cfg.n_grid[ni];
    const std::uint64_t seed = trial_seed(cfg.master_seed, ni, trial);
    const Dataset ds = trial_dataset(cfg, n, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = solve_for(cfg, ds, set, seed);
    const auto t1 = std::chrono::steady_clock::now();
    TrialRecord& rec = res.records[idx];
    rec.experiment = cfg.name;
    rec.n = n;
    rec.trial = trial;
    rec.error = trial_error(cfg, r, res.beta_nat);
    rec.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.converged = r.converged;
    rec.seed = seed;
  });
  res.aggregates = aggregate_records(res.records);
  try {
    res.decay = fit_decay_rate(res.aggregates);
  } catch (const ConfigError&) {
    res.decay.reset();
  }
  return res;
}

// ---------------------------------------------------------------- certificate

CertificateReport excess_certificate(const Dataset& ds, const HypothesisSet& set, const VectorXd& beta_nat,
                                     double t, std::size_t n_dirs, std::uint64_t seed,
                                     const SolverConfig& solver) {
  if (!(t > 0.0)) throw ConfigError("certificate scale t must be positive");
  if (beta_nat.size() != ds.dim()) throw DimensionError("beta_nat has wrong dimension");
  if (!set.contains(beta_nat, 1e-9)) throw ConfigError("beta_nat must lie in the set");
  CertificateReport rep;
  rep.t = t;
  const DirectionSample dirs = sphere_slice_directions(set, beta_nat, t, n_dirs, seed);
  rep.sampled_directions = dirs.directions.size();
  if (dirs.empty()) {
    rep.slice_empty = true;
    return rep;
  }
  const double n = static_cast<double>(ds.size());
  const VectorXd mism = ds.inputs * beta_nat - ds.outputs;
  rep.min_excess = std::numeric_limits<double>::infinity();
  for (const auto& v : dirs.directions) {
    const VectorXd h = t * (ds.inputs * v);
    rep.min_excess = std::min(rep.min_excess, (h.squaredNorm() + 2.0 * mism.dot(h)) / n);
  }
  rep.positive = rep.min_excess > 0.0;
  SolverConfig sc = solver;
  sc.seed = derive_seed(seed, "certificate_solver");
  const SolveResult r = ds.lifted ? solve_lifted(ds, set, sc) : solve_lasso(ds, set, sc);
  rep.solver_error = (r.estimate - beta_nat).norm();
  if (rep.positive) rep.coherent = *rep.solver_error < t;
  return rep;
}

// ---------------------------------------------------------------- phase transition

PhaseTransition run_phase_transition(const std::vector<Index>& k_grid, const std::vector<Index>& n_grid,
                                     const ExperimentConfig& base, std::optional<double> success_threshold) {
  if (!base.beta0_sparse) throw ConfigError("phase transitions need a sparse beta0 specification");
  if (success_threshold && !(*success_threshold > 0.0)) throw ConfigError("success threshold must be positive");
  if (k_grid.empty() || n_grid.empty()) throw ConfigError("phase transition grids must be non-empty");
  PhaseTransition pt;
  pt.k_grid = k_grid;
  pt.n_grid = n_grid;
  pt.trials = base.trials_per_n;
  pt.success = MatrixXd::Zero(static_cast<Index>(k_grid.size()), static_cast<Index>(n_grid.size()));
  const bool noiseless = base.model.noise.kind == NoiseSpec::Kind::none || base.model.noise.param == 0.0;

  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    ExperimentConfig cfg = base;
    cfg.beta0_sparse->k = k_grid[ki];
    cfg.master_seed = derive_seed(base.master_seed, "phase_k", ki);
    materialize_beta0(cfg);
    cfg.n_grid = n_grid;
    cfg.validate();
    const VectorXd beta_nat = resolve_target(cfg);
    const HypothesisSet set = resolve_set(cfg, beta_nat);
    std::vector<Index> support;
    for (Index j = 0; j < beta_nat.size(); ++j) {
      if (beta_nat(j) != 0.0) support.push_back(j);
    }
    const std::size_t trials = static_cast<std::size_t>(cfg.trials_per_n);
    std::vector<char> success(n_grid.size() * trials, 0);
    parallel_for(success.size(), [&](std::size_t idx) {
      const std::size_t ni = idx / trials;
      const int trial = static_cast<int>(idx % trials);
      const std::uint64_t seed = trial_seed(cfg.master_seed, ni, trial);
      const Dataset ds = trial_dataset(cfg, n_grid[ni], seed);
      const SolveResult r = solve_for(cfg, ds, set, seed);
      const double err = trial_error(cfg, r, beta_nat);
      double threshold = 1e-3 * beta_nat.norm();
      if (success_threshold) {
        threshold = *success_threshold;
      } else if (!noiseless && static_cast<Index>(support.size()) <= ds.size()) {
        MatrixXd xs(ds.size(), static_cast<Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) xs.col(static_cast<Index>(j)) = ds.inputs.col(support[j]);
        const VectorXd coef = xs.colPivHouseholderQr().solve(ds.outputs);
        VectorXd oracle = VectorXd::Zero(beta_nat.size());
        for (std::size_t j = 0; j < support.size(); ++j) oracle(support[j]) = coef(static_cast<Index>(j));
        threshold = std::max(threshold, 3.0 * (oracle - beta_nat).norm());
      }
      success[idx] = err < threshold ? 1 : 0;
    });
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      int hits = 0;
      for (std::size_t t = 0; t < trials; ++t) hits += success[ni * trials + t];
      pt.success(static_cast<Index>(ki), static_cast<Index>(ni)) = static_cast<double>(hits) / static_cast<double>(trials);
    }
  }
  return pt;
}

}  // namespace subexp
