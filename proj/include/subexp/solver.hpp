#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "subexp/geometry.hpp"
#include "subexp/models.hpp"

namespace subexp {

enum class StepRule { fixed_inverse_lipschitz, backtracking };

std::string to_string(StepRule rule);
StepRule parse_step_rule(const std::string& name);

struct SolverConfig {
  int max_iters = 20000;
  double tol = 1e-10;
  StepRule step_rule = StepRule::fixed_inverse_lipschitz;
  double backtrack_beta = 0.5;  // step shrink factor
  double backtrack_c = 0.5;     // sufficient decrease: f(x+) <= f(x) - (c/step) |x+ - x|^2
  int restart_count = 1;
  std::uint64_t seed = 0;
  bool record_trace = false;

  void validate() const;
};

struct SolveResult {
  VectorXd estimate;  // vec(B) (column-major) for lifted solves
  Index matrix_dim = 0;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;
  double lipschitz = 0.0;
  double fixed_point_residual = 0.0;

  MatrixXd estimate_matrix() const;
};

double empirical_risk(const MatrixXd& x, const VectorXd& y, const VectorXd& beta);
double empirical_risk(const Dataset& ds, const VectorXd& beta);

struct ExcessDecomposition {
  double quadratic = 0.0;   // Q
  double multiplier = 0.0;  // M
  double excess() const { return quadratic + multiplier; }
};

ExcessDecomposition excess_decomposition(const Dataset& ds, const VectorXd& beta, const VectorXd& beta_nat);

// Largest eigenvalue of (2/n) X^T X by power iteration (50 iterations, tolerance 1e-8).
double lipschitz_constant(const MatrixXd& x, std::uint64_t seed = 0);

// ||beta - P(beta - grad / L)||_2.
double fixed_point_residual(const Dataset& ds, const HypothesisSet& set, const VectorXd& beta, double lipschitz);

SolveResult solve_lasso(const Dataset& ds, const HypothesisSet& set, const SolverConfig& config);
SolveResult solve_lifted(const Dataset& ds, const HypothesisSet& set, const SolverConfig& config);

struct Rank1 {
  double lambda1 = 0.0;
  VectorXd beta_unit;
  bool degenerate = false;
};

Rank1 rank1_extract(const MatrixXd& b);
double sign_invariant_error(const VectorXd& a, const VectorXd& b);

}  // namespace subexp
