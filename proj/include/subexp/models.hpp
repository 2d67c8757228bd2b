#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "subexp/distributions.hpp"
#include "subexp/geometry.hpp"

namespace subexp {

enum class ModelKind { linear, single_index, quadratic, lifted_view };
enum class Link { identity, sign, tanh, relu, square, cube, abs };

std::string to_string(ModelKind kind);
std::string to_string(Link link);
ModelKind parse_model_kind(const std::string& name);
Link parse_link(const std::string& name);
double apply_link(Link link, double z);

struct NoiseSpec {
  enum class Kind { none, gaussian, laplace };
  Kind kind = Kind::none;
  double param = 0.0;  // std for gaussian, scale b for laplace

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double std) { return {Kind::gaussian, std}; }
  static NoiseSpec laplace(double scale) { return {Kind::laplace, scale}; }
  static NoiseSpec laplace_with_std(double std);
  double std_dev() const;
  double draw(Rng& rng) const;
  std::string describe() const;
};

// lifted_view: quadratic outputs y = (<x, beta0> + nu)^2 paired with centered lifts.
struct ObservationModel {
  ModelKind kind = ModelKind::linear;
  VectorXd beta0;
  Link link = Link::identity;
  NoiseSpec noise;

  void validate(Index p) const;
  bool lifted() const { return kind == ModelKind::lifted_view; }
  double respond(const VectorXd& x, Rng& rng) const;
};

struct Provenance {
  DistributionSpec spec;
  ObservationModel model;
  std::uint64_t seed = 0;
};

struct Dataset {
  MatrixXd inputs;  // n x p, or n x p*p centered lifts (column-major vec)
  VectorXd outputs;
  Index base_dim = 0;
  bool lifted = false;
  Provenance provenance;

  Index size() const { return inputs.rows(); }
  Index dim() const { return inputs.cols(); }
};

struct LiftCentering {
  std::size_t calibration_size = 100000;
};

Dataset generate_dataset(const ObservationModel& model, const DistributionSpec& spec, Index n,
                         std::uint64_t seed, const LiftCentering& centering = {});
// Centered lifts x x^T - S per row, vectorized column-major.
MatrixXd lift_rows(const MatrixXd& x, const MatrixXd& second_moment);
MatrixXd lift_centering_matrix(const DistributionSpec& spec, const LiftCentering& centering,
                               std::uint64_t seed);

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t budget = 0;
};

ScalarEstimate target_scale_mu(const ObservationModel& model, const DistributionSpec& spec,
                               std::size_t mc_budget, std::uint64_t seed);
ScalarEstimate lifted_target_scale(Link link, std::size_t mc_budget, std::uint64_t seed);

struct MismatchReport {
  double sigma = 0.0;
  double rho_global = 0.0;
  std::optional<double> rho_local;
  std::optional<double> t;
  std::size_t local_directions = 0;
  VectorXd mean_correlation;  // MC mean of xi x, xi = y - <x, beta_nat>
  VectorXd mc_std_error;      // per coordinate
  double mc_std_error_rms = 0.0;
  std::size_t budget = 0;
  std::string status = "ok";
};

MismatchReport mismatch_report(const ObservationModel& model, const DistributionSpec& spec,
                               const VectorXd& beta_nat, const HypothesisSet* set,
                               std::optional<double> t, std::size_t mc_budget, std::uint64_t seed,
                               std::size_t n_dirs = 2000);

}  // namespace subexp
