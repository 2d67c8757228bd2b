#include "subexp/solver.hpp"

#include <cmath>
#include <limits>

#include "subexp/errors.hpp"

namespace subexp {

std::string to_string(StepRule rule) {
  return rule == StepRule::backtracking ? "backtracking" : "fixed_inverse_lipschitz";
}

StepRule parse_step_rule(const std::string& name) {
  if (name == "fixed_inverse_lipschitz" || name == "fixed") return StepRule::fixed_inverse_lipschitz;
  if (name == "backtracking") return StepRule::backtracking;
  throw ConfigError("unknown step rule '" + name + "'");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (restart_count < 1) throw ConfigError("restart_count must be >= 1");
  if (!(backtrack_beta > 0.0 && backtrack_beta < 1.0)) throw ConfigError("backtracking beta must lie in (0,1)");
  if (!(backtrack_c > 0.0 && backtrack_c <= 0.5)) throw ConfigError("backtracking c must lie in (0, 1/2]");
}

MatrixXd SolveResult::estimate_matrix() const {
  if (matrix_dim == 0) return estimate;
  return Eigen::Map<const MatrixXd>(estimate.data(), matrix_dim, matrix_dim);
}

double empirical_risk(const MatrixXd& x, const VectorXd& y, const VectorXd& beta) {
  if (x.cols() != beta.size()) throw DimensionError("beta dimension differs from inputs");
  if (x.rows() != y.size()) throw DimensionError("input and output row counts differ");
  return (y - x * beta).squaredNorm() / static_cast<double>(x.rows());
}

double empirical_risk(const Dataset& ds, const VectorXd& beta) {
  return empirical_risk(ds.inputs, ds.outputs, beta);
}

ExcessDecomposition excess_decomposition(const Dataset& ds, const VectorXd& beta, const VectorXd& beta_nat) {
  if (beta.size() != ds.dim() || beta_nat.size() != ds.dim()) throw DimensionError("decomposition dimension");
  const double n = static_cast<double>(ds.size());
  const VectorXd h = ds.inputs * (beta - beta_nat);
  const VectorXd mism = ds.inputs * beta_nat - ds.outputs;
  return {h.squaredNorm() / n, 2.0 * mism.dot(h) / n};
}

double lipschitz_constant(const MatrixXd& x, std::uint64_t seed) {
  const Index p = x.cols();
  const double scale = 2.0 / static_cast<double>(x.rows());
  Rng rng(derive_seed(seed, "power_iteration"));
  VectorXd v(p);
  for (Index j = 0; j < p; ++j) v(j) = standard_normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    VectorXd w = scale * (x.transpose() * (x * v));
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-8 * std::abs(next);
    lambda = next;
    if (done) break;
  }
  // Rayleigh quotient of the final iterate.
  return v.dot(scale * (x.transpose() * (x * v)));
}

namespace {

struct RunState {
  VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

RunState run_pgd(const MatrixXd& x, const VectorXd& y, const HypothesisSet& set, const SolverConfig& cfg,
                 VectorXd beta, double lipschitz) {
  RunState st;
  const double n = static_cast<double>(x.rows());
  const double floor = 1e-28 * (1.0 + y.squaredNorm() / n);
  VectorXd residual = y - x * beta;
  double obj = residual.squaredNorm() / n;
  st.best = beta;
  st.best_obj = obj;
  if (cfg.record_trace) st.trace.push_back(obj);
  double step = lipschitz > 0.0 ? 1.0 / (1.01 * lipschitz) : 1.0;
  const double min_step = lipschitz > 0.0 ? step : 0.0;

  VectorXd next;
  VectorXd next_residual;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const VectorXd grad = (-2.0 / n) * (x.transpose() * residual);
    double next_obj = 0.0;
    auto trial = [&](double s) {
      next = set.project(beta - s * grad);
      next_residual = y - x * next;
      next_obj = next_residual.squaredNorm() / n;
    };
    if (cfg.step_rule == StepRule::backtracking) {
      step /= cfg.backtrack_beta;
      for (int bt = 0; bt < 60; ++bt) {
        trial(step);
        if (next_obj <= obj - (cfg.backtrack_c / step) * (next - beta).squaredNorm()) break;
        // Steps below 1/L already guarantee sufficient decrease; failures there are rounding.
        if (step <= min_step) break;
        step = std::max(step * cfg.backtrack_beta, min_step);
      }
    } else {
      trial(step);
    }
    const double moved = (next - beta).norm();
    const double decrease = obj - next_obj;
    const bool objective_settled = next_obj <= floor || decrease <= cfg.tol * std::max(obj, floor);
    const bool step_settled = moved <= cfg.tol * (1.0 + beta.norm());
    beta.swap(next);
    residual.swap(next_residual);
    obj = next_obj;
    st.iterations = it;
    if (cfg.record_trace) st.trace.push_back(obj);
    // Later iterates win ties within rounding of the best objective.
    if (obj <= st.best_obj * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
      st.best = beta;
      st.best_obj = obj;
    }
    if (objective_settled && step_settled) {
      st.converged = true;
      break;
    }
  }
  st.best_obj = empirical_risk(x, y, st.best);
  return st;
}

void check_finite(const Dataset& ds) {
  if (!ds.inputs.allFinite() || !ds.outputs.allFinite()) throw ConfigError("dataset contains non-finite values");
  if (ds.inputs.rows() != ds.outputs.size()) throw DimensionError("input and output row counts differ");
  if (ds.size() < 1) throw ConfigError("dataset is empty");
}

SolveResult solve_impl(const Dataset& ds, const HypothesisSet& set, const SolverConfig& cfg) {
  cfg.validate();
  check_finite(ds);
  if (set.ambient() != ds.dim()) throw DimensionError("set ambient dimension differs from dataset");
  const double lipschitz = lipschitz_constant(ds.inputs, cfg.seed);

  SolveResult best;
  best.lipschitz = lipschitz;
  best.objective = std::numeric_limits<double>::infinity();
  Rng rng(derive_seed(cfg.seed, "restarts"));
  const double spread = std::max(1.0, set.diameter_l2());
  for (int r = 0; r < cfg.restart_count; ++r) {
    VectorXd start = VectorXd::Zero(ds.dim());
    if (r > 0) {
      for (Index j = 0; j < start.size(); ++j) start(j) = spread * standard_normal(rng);
    }
    start = set.project(start);
    RunState st = run_pgd(ds.inputs, ds.outputs, set, cfg, start, lipschitz);
    if (st.best_obj < best.objective) {
      best.estimate = st.best;
      best.objective = st.best_obj;
      best.iterations = st.iterations;
      best.converged = st.converged;
      best.objective_trace = std::move(st.trace);
    }
  }
  best.fixed_point_residual = fixed_point_residual(ds, set, best.estimate, lipschitz);
  return best;
}

}  // namespace

double fixed_point_residual(const Dataset& ds, const HypothesisSet& set, const VectorXd& beta, double lipschitz) {
  if (!(lipschitz > 0.0)) return 0.0;
  const VectorXd residual = ds.outputs - ds.inputs * beta;
  const VectorXd grad = (-2.0 / static_cast<double>(ds.size())) * (ds.inputs.transpose() * residual);
  return (beta - set.project(beta - grad / lipschitz)).norm();
}

SolveResult solve_lasso(const Dataset& ds, const HypothesisSet& set, const SolverConfig& config) {
  if (ds.lifted) throw ConfigError("solve_lasso expects a vector dataset; use solve_lifted");
  if (set.kind() == SetKind::lifted_psd_fro) throw ConfigError("solve_lasso needs a vector hypothesis set");
  return solve_impl(ds, set, config);
}

SolveResult solve_lifted(const Dataset& ds, const HypothesisSet& set, const SolverConfig& config) {
  if (!ds.lifted) throw ConfigError("solve_lifted expects a lifted dataset");
  if (set.kind() != SetKind::lifted_psd_fro) throw ConfigError("solve_lifted needs a lifted_psd_fro set");
  SolveResult r = solve_impl(ds, set, config);
  r.matrix_dim = set.base_dimension();
  return r;
}

Rank1 rank1_extract(const MatrixXd& b) {
  if (b.rows() != b.cols() || b.rows() < 1) throw DimensionError("rank1_extract needs a square matrix");
  const Index p = b.rows();
  MatrixXd sym = b;
  if ((b - b.transpose()).norm() > 1e-10) sym = 0.5 * (b + b.transpose());
  Rank1 out;
  const double fro = sym.norm();
  if (fro <= 1e-14) {
    out.lambda1 = 0.0;
    out.beta_unit = VectorXd::Unit(p, 0);
    out.degenerate = true;
    return out;
  }
  // Gershgorin shift: the shifted matrix is PSD, so power iteration finds the top eigenvalue.
  double lower = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < p; ++i) lower = std::min(lower, sym(i, i) - (sym.row(i).cwiseAbs().sum() - std::abs(sym(i, i))));
  const MatrixXd shifted = sym + std::max(0.0, -lower) * MatrixXd::Identity(p, p);
  VectorXd v = VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  v += VectorXd::LinSpaced(p, 0.0, 1e-3);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    VectorXd w = shifted * v;
    const double nw = w.norm();
    w /= nw;
    if (w.dot(v) < 0.0) w = -w;
    const double moved = (w - v).norm();
    v = w;
    lambda = v.dot(sym * v);
    if (moved <= 1e-10) break;
  }
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  out.lambda1 = std::max(lambda, 0.0);
  out.beta_unit = v;
  return out;
}

double sign_invariant_error(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw DimensionError("sign_invariant_error needs equal dimensions");
  return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace subexp
