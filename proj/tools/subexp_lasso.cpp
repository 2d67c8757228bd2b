#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "subexp/complexity.hpp"
#include "subexp/config.hpp"
#include "subexp/emit.hpp"
#include "subexp/errors.hpp"
#include "subexp/harness.hpp"
#include "subexp/parallel.hpp"

using namespace subexp;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "table";
  int threads = 1;
};

ExperimentConfig load(const Globals& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this subcommand");
  ExperimentConfig cfg = load_config(g.config_path);
  if (g.seed) cfg.master_seed = *g.seed;
  materialize_beta0(cfg);
  cfg.validate();
  return cfg;
}

Cell opt_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{std::string()}; }
Cell opt_cell(const std::optional<bool>& v) { return v ? Cell{*v} : Cell{std::string()}; }

Index pick_n(std::optional<Index> n, const ExperimentConfig& cfg) { return n ? *n : cfg.defaults.n; }

void cmd_sample(const Globals& g, std::optional<Index> n_opt) {
  const ExperimentConfig cfg = load(g);
  const Index n = pick_n(n_opt, cfg);
  const Dataset ds = trial_dataset(cfg, n, trial_seed(cfg.master_seed, 0, 0));
  Table t;
  const char* prefix = ds.lifted ? "a" : "x";
  for (Index j = 0; j < ds.dim(); ++j) t.columns.push_back(prefix + std::to_string(j));
  t.columns.push_back("y");
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<Cell> row;
    for (Index j = 0; j < ds.dim(); ++j) row.emplace_back(ds.inputs(i, j));
    row.emplace_back(ds.outputs(i));
    t.add(std::move(row));
  }
  emit_to_path(t, parse_format(g.format), g.out);
}

void cmd_solve(const Globals& g, std::optional<Index> n_opt, bool coefficients) {
  const ExperimentConfig cfg = load(g);
  const Index n = pick_n(n_opt, cfg);
  const VectorXd beta_nat = resolve_target(cfg);
  const HypothesisSet set = resolve_set(cfg, beta_nat);
  const std::uint64_t seed = trial_seed(cfg.master_seed, 0, 0);
  const Dataset ds = trial_dataset(cfg, n, seed);
  const SolveResult r = solve_for(cfg, ds, set, seed);
  Table t;
  if (coefficients) {
    t.columns = {"index", "estimate"};
    for (Index j = 0; j < r.estimate.size(); ++j) t.add({static_cast<std::int64_t>(j), r.estimate(j)});
  } else {
    t.columns = {"n", "dim", "iterations", "objective", "converged", "error", "fixed_point_residual", "lipschitz"};
    t.add({static_cast<std::int64_t>(n), static_cast<std::int64_t>(ds.dim()),
           static_cast<std::int64_t>(r.iterations), r.objective, r.converged, trial_error(cfg, r, beta_nat),
           r.fixed_point_residual, r.lipschitz});
  }
  emit_to_path(t, parse_format(g.format), g.out);
}

void cmd_mismatch(const Globals& g, std::optional<double> t_opt, std::optional<std::size_t> budget_opt,
                  std::optional<std::size_t> dirs_opt) {
  const ExperimentConfig cfg = load(g);
  if (cfg.estimator == Estimator::lifted) throw ConfigError("mismatch reports are defined for vector models");
  const VectorXd beta_nat = resolve_target(cfg);
  const HypothesisSet set = resolve_set(cfg, beta_nat);
  const MismatchReport rep =
      mismatch_report(cfg.model, cfg.spec, beta_nat, &set, t_opt, budget_opt.value_or(cfg.defaults.mc_budget),
                      derive_seed(cfg.master_seed, "mismatch"), dirs_opt.value_or(cfg.defaults.n_dirs));
  Table t;
  t.columns = {"sigma", "rho_global", "rho_local", "t", "local_directions", "mc_std_error_rms", "budget", "status"};
  t.add({rep.sigma, rep.rho_global, opt_cell(rep.rho_local), opt_cell(rep.t),
         static_cast<std::uint64_t>(rep.local_directions), rep.mc_std_error_rms,
         static_cast<std::uint64_t>(rep.budget), rep.status});
  emit_to_path(t, parse_format(g.format), g.out);
}

void cmd_complexity(const Globals& g, std::optional<Index> n_opt, std::optional<std::size_t> trials_opt) {
  const ExperimentConfig cfg = load(g);
  const Index n = pick_n(n_opt, cfg);
  const std::size_t trials = trials_opt.value_or(cfg.defaults.width_trials);
  const VectorXd beta_nat = resolve_target(cfg);
  const HypothesisSet set = resolve_set(cfg, beta_nat);
  const std::uint64_t seed = derive_seed(cfg.master_seed, "complexity");
  Table t;
  t.columns = {"kind", "mean", "std_error", "trials"};
  auto add_width = [&](const WidthEstimate& w) {
    t.add({to_string(w.kind) + "_width", w.mean, w.std_error, static_cast<std::uint64_t>(w.trials)});
  };
  add_width(gaussian_width(set, trials, derive_seed(seed, "gaussian")));
  add_width(exponential_width(set, trials, derive_seed(seed, "exponential")));
  if (cfg.estimator == Estimator::lasso) {
    add_width(empirical_width(set, cfg.spec, n, trials, derive_seed(seed, "empirical")));
  }
  if (cfg.beta0_sparse && cfg.estimator == Estimator::lasso) {
    const Index k = cfg.beta0_sparse->k;
    const Index p = cfg.spec.dimension;
    for (auto regime : {SparseRegime::subgaussian_20, SparseRegime::independent_2inf, SparseRegime::subexp_02_m,
                        SparseRegime::subexp_02_q}) {
      const SparseBound b = sparse_cone_bound(k, p, n, regime);
      t.add({"sparse_cone" + to_string(regime) + (b.out_of_regime ? "*" : ""), b.value, 0.0, std::uint64_t{0}});
    }
    t.add({std::string("dudley_psi2"), dudley_sparse_bound(k, p, 2), 0.0, std::uint64_t{0}});
    t.add({std::string("dudley_psi1"), dudley_sparse_bound(k, p, 1), 0.0, std::uint64_t{0}});
  }
  emit_to_path(t, parse_format(g.format), g.out);
}

void cmd_certificate(const Globals& g, std::optional<Index> n_opt, std::optional<double> t_opt,
                     std::optional<std::size_t> dirs_opt) {
  const ExperimentConfig cfg = load(g);
  const Index n = pick_n(n_opt, cfg);
  const VectorXd beta_nat = resolve_target(cfg);
  const HypothesisSet set = resolve_set(cfg, beta_nat);
  const std::uint64_t seed = trial_seed(cfg.master_seed, 0, 0);
  const Dataset ds = trial_dataset(cfg, n, seed);
  const CertificateReport rep =
      excess_certificate(ds, set, beta_nat, t_opt.value_or(cfg.defaults.t), dirs_opt.value_or(cfg.defaults.n_dirs),
                         derive_seed(seed, "certificate"), cfg.solver);
  Table t;
  t.columns = {"t", "sampled_directions", "min_excess", "positive", "slice_empty", "solver_error", "coherent"};
  t.add({rep.t, static_cast<std::uint64_t>(rep.sampled_directions),
         rep.slice_empty ? Cell{std::string()} : Cell{rep.min_excess}, rep.positive, rep.slice_empty,
         opt_cell(rep.solver_error), opt_cell(rep.coherent)});
  emit_to_path(t, parse_format(g.format), g.out);
}

void print_decay(const std::string& name, const std::string& hash, const std::optional<SlopeFit>& fit) {
  std::cerr << name << " [" << hash << "]";
  if (fit) {
    std::cerr << " slope " << fit->slope << " +- " << fit->std_error << " (" << fit->points << " points)";
  }
  std::cerr << "\n";
}

void cmd_experiment(const Globals& g) {
  const ExperimentConfig cfg = load(g);
  const ExperimentResult res = run_error_curve(cfg);
  const std::string path = g.out.empty() ? cfg.results_path : g.out;
  emit_to_path(records_table(res.records), parse_format(g.format), path);
  print_decay(res.experiment, res.config_hash, res.decay);
}

void cmd_report(const Globals& g, const std::string& input) {
  ExperimentResult res;
  res.records = read_records_file(input);
  if (res.records.empty()) throw ConfigError("no records in '" + input + "'");
  res.experiment = res.records.front().experiment;
  res.aggregates = aggregate_records(res.records);
  std::optional<SlopeFit> fit;
  try {
    fit = fit_decay_rate(res.aggregates);
  } catch (const ConfigError&) {
  }
  Table t = aggregates_table(res);
  t.columns.push_back("slope");
  t.columns.push_back("slope_std_error");
  for (auto& row : t.rows) {
    row.push_back(fit ? Cell{fit->slope} : Cell{std::string()});
    row.push_back(fit ? Cell{fit->std_error} : Cell{std::string()});
  }
  emit_to_path(t, parse_format(g.format), g.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized and lifted Lasso under sub-exponential data"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (YAML)");
  app.add_option("--seed", g.seed, "Override the config master seed");
  app.add_option("--out", g.out, "Output path (default stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "jsonl", "table"}));
  app.add_option("--threads", g.threads, "Worker threads (SUBEXP_LASSO_THREADS overrides)")
      ->check(CLI::PositiveNumber);

  std::optional<Index> n;
  std::optional<double> t;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> dirs;
  std::optional<std::size_t> trials;
  bool coefficients = false;
  std::string input;

  auto* sample = app.add_subcommand("sample", "Emit one generated dataset");
  sample->add_option("-n,--n", n, "Sample size");
  auto* solve = app.add_subcommand("solve", "Solve one dataset and summarize");
  solve->add_option("-n,--n", n, "Sample size");
  solve->add_flag("--coefficients", coefficients, "Emit the estimate instead of the summary");
  auto* mismatch = app.add_subcommand("mismatch", "Mismatch parameters at the target");
  mismatch->add_option("--t", t, "Local scale; omit for the global report only");
  mismatch->add_option("--budget", budget, "Monte Carlo budget");
  mismatch->add_option("--dirs", dirs, "Direction samples for the local supremum");
  auto* complexity = app.add_subcommand("complexity", "Width and complexity table");
  complexity->add_option("-n,--n", n, "Sample size for empirical widths and sparse bounds");
  complexity->add_option("--trials", trials, "Monte Carlo trials per width");
  auto* certificate = app.add_subcommand("certificate", "Excess-risk certificate at scale t");
  certificate->add_option("-n,--n", n, "Sample size");
  certificate->add_option("--t", t, "Scale");
  certificate->add_option("--dirs", dirs, "Direction samples on the slice");
  auto* experiment = app.add_subcommand("experiment", "Run the configured error curve");
  auto* report = app.add_subcommand("report", "Aggregate a records file and fit the decay slope");
  report->add_option("--in", input, "Records file (.csv or .jsonl)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    set_thread_count(g.threads);
    if (*sample) cmd_sample(g, n);
    else if (*solve) cmd_solve(g, n, coefficients);
    else if (*mismatch) cmd_mismatch(g, t, budget, dirs);
    else if (*complexity) cmd_complexity(g, n, trials);
    else if (*certificate) cmd_certificate(g, n, t, dirs);
    else if (*experiment) cmd_experiment(g);
    else if (*report) cmd_report(g, input);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
