#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subexp/distributions.hpp"
#include "subexp/geometry.hpp"
#include "subexp/models.hpp"
#include "subexp/solver.hpp"

namespace subexp {

enum class TargetRuleKind { beta0, mu_beta0, erm_mc, explicit_vector };
enum class Estimator { lasso, lifted };

std::string to_string(TargetRuleKind kind);
std::string to_string(Estimator e);

struct TargetRule {
  TargetRuleKind kind = TargetRuleKind::beta0;
  VectorXd value;  // explicit_vector only
  std::size_t mc_budget = 1000000;
};

// Random k-sparse beta0: uniform support, Gaussian (or equal-magnitude) entries scaled to `norm`.
struct SparseBeta {
  Index k = 1;
  double norm = 1.0;
  bool equal_magnitudes = false;
};

struct SetConfig {
  SetKind kind = SetKind::l1_ball;
  std::optional<double> radius;  // empty: tuned to the target (|b|_1, |b|_2, |b|_inf, |b|_2^2)
  double tuned_factor = 1.0;
  VectorXd center;
  MatrixXd vertices;  // columns
};

struct CommandDefaults {
  Index n = 200;
  double t = 0.1;
  std::size_t n_dirs = 2000;
  std::size_t mc_budget = 100000;
  std::size_t width_trials = 2000;
  double u = 8.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t master_seed = 0;
  DistributionSpec spec;
  ObservationModel model;
  std::optional<SparseBeta> beta0_sparse;
  SetConfig set;
  TargetRule target;
  SolverConfig solver;
  Estimator estimator = Estimator::lasso;
  std::vector<Index> n_grid;
  int trials_per_n = 1;
  std::string results_path;
  CommandDefaults defaults;

  void validate() const;
};

// Fills model.beta0 from beta0_sparse when present.
void materialize_beta0(ExperimentConfig& cfg);
VectorXd resolve_target(const ExperimentConfig& cfg);
HypothesisSet resolve_set(const ExperimentConfig& cfg, const VectorXd& beta_nat);
std::string config_hash(const ExperimentConfig& cfg);

struct TrialRecord {
  std::string experiment;
  Index n = 0;
  int trial = 0;
  double error = 0.0;
  double runtime_ms = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct Aggregate {
  Index n = 0;
  std::size_t count = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

struct ExperimentResult {
  std::string experiment;
  std::string config_hash;
  VectorXd beta_nat;
  std::vector<TrialRecord> records;
  std::vector<Aggregate> aggregates;
  std::optional<SlopeFit> decay;
};

// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);
std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records);
SlopeFit fit_decay_rate(const std::vector<Aggregate>& aggregates);
SlopeFit fit_decay_rate(const ExperimentResult& result);

// Error of one trial estimate against the target (sign-invariant for lifted solves).
double trial_error(const ExperimentConfig& cfg, const SolveResult& r, const VectorXd& beta_nat);
std::uint64_t trial_seed(std::uint64_t master, std::size_t n_index, int trial);
Dataset trial_dataset(const ExperimentConfig& cfg, Index n, std::uint64_t seed);
SolveResult solve_for(const ExperimentConfig& cfg, const Dataset& ds, const HypothesisSet& set,
                      std::uint64_t seed);

ExperimentResult run_error_curve(const ExperimentConfig& cfg);

struct CertificateReport {
  double t = 0.0;
  std::size_t sampled_directions = 0;
  double min_excess = 0.0;
  bool positive = false;
  bool slice_empty = false;
  std::optional<double> solver_error;
  // positive certificate implies solver error < t.
  std::optional<bool> coherent;
};

CertificateReport excess_certificate(const Dataset& ds, const HypothesisSet& set, const VectorXd& beta_nat,
                                     double t, std::size_t n_dirs, std::uint64_t seed,
                                     const SolverConfig& solver = {});

struct PhaseTransition {
  std::vector<Index> k_grid;
  std::vector<Index> n_grid;
  MatrixXd success;  // rows k, columns n
  int trials = 0;
};

// Default threshold: 1e-3 |beta_nat|_2 when noiseless; otherwise three times the error of the
// support-oracle least-squares fit on the same data (the empirical noise floor).
PhaseTransition run_phase_transition(const std::vector<Index>& k_grid, const std::vector<Index>& n_grid,
                                     const ExperimentConfig& base, std::optional<double> success_threshold);

}  // namespace subexp
