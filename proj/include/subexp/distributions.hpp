#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subexp/rng.hpp"

namespace subexp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class DistributionKind { gaussian, rademacher, laplace, symmetric_exponential, mixed };

std::string to_string(DistributionKind kind);
DistributionKind parse_distribution_kind(const std::string& name);

// Scale that gives a coordinate of the given (non-mixed) kind unit variance.
double unit_variance_scale(DistributionKind kind);
double coordinate_variance(DistributionKind kind, double scale);
// Exact E|X|^q for one coordinate.
double coordinate_abs_moment(DistributionKind kind, double scale, double q);

struct DistributionSpec {
  DistributionKind kind = DistributionKind::gaussian;
  Index dimension = 1;
  double scale = 1.0;
  std::optional<MatrixXd> mixing;  // p x d, kind == mixed only
  DistributionKind base_kind = DistributionKind::gaussian;
  std::string seed_domain = "inputs";

  static DistributionSpec unit_variance(DistributionKind kind, Index p);
  static DistributionSpec mixed_from(DistributionKind base, const MatrixXd& m, double scale);

  void validate() const;
  DistributionKind coordinate_kind() const { return kind == DistributionKind::mixed ? base_kind : kind; }
  Index latent_dimension() const;
  bool isotropic_by_construction() const;
  MatrixXd second_moment() const;  // analytic E[x x^T]
};

MatrixXd sample_inputs(const DistributionSpec& spec, Index n, std::uint64_t seed);
double draw_coordinate(DistributionKind kind, double scale, Rng& rng);
void draw_vector(const DistributionSpec& spec, Rng& rng, Eigen::Ref<VectorXd> out);

class SemiNorm {
 public:
  enum class Kind {
    zero,
    euclidean_scaled,
    infinity_scaled,
    mt_euclidean,
    mt_infinity,
    frobenius_scaled,
    operator_scaled
  };

  static SemiNorm zero();
  static SemiNorm euclidean_scaled(double c);
  static SemiNorm infinity_scaled(double c);
  static SemiNorm mt_euclidean(const MatrixXd& m, double c);
  static SemiNorm mt_infinity(const MatrixXd& m, double c);
  // Matrix norms act on column-major p*p vectorizations.
  static SemiNorm frobenius_scaled(double c, Index p);
  static SemiNorm operator_scaled(double c, Index p);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  bool is_zero() const { return kind_ == Kind::zero || scale_ == 0.0; }
  std::optional<Index> expected_dimension() const;
  std::string describe() const;

  double operator()(const VectorXd& v) const;
  SemiNorm scaled(double factor) const;

 private:
  Kind kind_ = Kind::zero;
  double scale_ = 0.0;
  MatrixXd mixing_;
  Index matrix_dim_ = 0;
};

struct ConcentrationProfile {
  SemiNorm g_norm;
  SemiNorm e_norm;
  double g_constant = 1.0;
  double e_constant = 1.0;

  bool constants_set_to_one() const { return g_constant == 1.0 && e_constant == 1.0; }
  double g(const VectorXd& v) const { return g_constant * g_norm(v); }
  double e(const VectorXd& v) const { return e_constant * e_norm(v); }
  // 2 exp(-min{t^2/g(v)^2, t/e(v)}), with t/0 = inf for t > 0.
  double tail_bound(const VectorXd& v, double t) const;
  ConcentrationProfile with_constants(double g_mult, double e_mult) const;
  void validate() const;
};

enum class ProfileVariant { natural, uniform_subexponential, lifted };

ConcentrationProfile profile_for(const DistributionSpec& spec,
                                 ProfileVariant variant = ProfileVariant::natural);

// Multipliers on (g, e) under which the natural profile provably bounds the tail:
// Chernoff for Gaussian coordinates, Hoeffding for Rademacher, and the MGF bound
// 1/(1 - b^2 l^2) <= exp(2 b^2 l^2), |l| <= 1/(sqrt(2) b), for Laplace coordinates.
struct TailConstants {
  double g = 1.0;
  double e = 1.0;
};
TailConstants sufficient_tail_constants(const DistributionSpec& spec);

std::vector<double> default_q_grid();

struct OrliczEstimate {
  int alpha = 1;
  double value = 0.0;
  std::vector<double> q_grid;
  std::size_t sample_count = 0;
};

OrliczEstimate psi_norm_estimate(std::span<const double> samples, int alpha,
                                 const std::vector<double>& q_grid = default_q_grid());
// Same proxy evaluated from exact coordinate moments.
double coordinate_psi_proxy(DistributionKind kind, double scale, int alpha,
                            const std::vector<double>& q_grid = default_q_grid());

struct TailReport {
  std::vector<double> thresholds;
  std::vector<double> empirical_tail;
  std::vector<double> bound;
  std::size_t violations = 0;
  std::size_t trials = 0;
  double g_value = 0.0;
  double e_value = 0.0;
  bool profile_failure = false;
  // Smallest s with 2 exp(-min{t^2/(s g)^2, t/(s e)}) >= empirical tail at every threshold.
  double min_constant_multiplier = 0.0;
};

TailReport verify_bernstein_tail(const DistributionSpec& spec, const ConcentrationProfile& profile,
                                 const VectorXd& v, const std::vector<double>& thresholds,
                                 std::size_t mc_trials, std::uint64_t seed);

// ||xi||_2 / (sqrt(n) psi_1-proxy(xi)), with 0/0 := 0.
double xi_norm_concentration_check(std::span<const double> xi);

}  // namespace subexp
