#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subexp/distributions.hpp"
#include "subexp/geometry.hpp"

namespace subexp {

enum class WidthKind { gaussian, exponential, empirical };
std::string to_string(WidthKind kind);

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  WidthKind kind = WidthKind::gaussian;
  Index n = 0;  // empirical widths only
  std::string target;
};

WidthEstimate gaussian_width(const Skeleton& target, std::size_t trials, std::uint64_t seed);
WidthEstimate gaussian_width(const HypothesisSet& target, std::size_t trials, std::uint64_t seed);
// Y has i.i.d. symmetric coordinates with P(|Y_j| >= t) = e^{-t}.
WidthEstimate exponential_width(const Skeleton& target, std::size_t trials, std::uint64_t seed);
WidthEstimate exponential_width(const HypothesisSet& target, std::size_t trials, std::uint64_t seed);
WidthEstimate empirical_width(const Skeleton& target, const DistributionSpec& spec, Index n,
                              std::size_t trials, std::uint64_t seed);
WidthEstimate empirical_width(const HypothesisSet& target, const DistributionSpec& spec, Index n,
                              std::size_t trials, std::uint64_t seed);

struct ThetaRule {
  enum class Kind { fixed, paley_zygmund };
  Kind kind = Kind::paley_zygmund;
  double theta = 0.0;

  static ThetaRule fixed(double t) { return {Kind::fixed, t}; }
  static ThetaRule paley_zygmund() { return {Kind::paley_zygmund, 0.0}; }
};

struct SmallBallEstimate {
  double theta = 0.0;
  double q_hat = 0.0;      // min over directions of P(|<x,v>| >= 2 theta)
  double alpha_hat = 0.0;  // min over directions of E|<x,v>|
  double delta_hat = 0.0;  // max over directions of E<x,v>^2
  double pz_bound = 0.0;   // alpha^3 / (16 delta)
  std::optional<double> tau;  // alpha_hat / 4 when alpha_hat > 0
  std::size_t direction_count = 0;
  std::size_t trials = 0;
  double alpha_std_error = 0.0;
  double delta_std_error = 0.0;
  double q_std_error = 0.0;
  double pz_std_error = 0.0;
  bool degenerate = false;
  // Paley-Zygmund rule only: tau q_hat >= pz_bound - 3 (tau se_q + se_pz).
  std::optional<bool> pz_holds;
  double pz_allowance = 0.0;
};

SmallBallEstimate small_ball_report(const DistributionSpec& spec, const std::vector<VectorXd>& directions,
                                    ThetaRule rule, std::size_t trials, std::uint64_t seed);

struct ComplexityPair {
  double q_bound = 0.0;
  double m_bound = 0.0;
  double delta_g = 0.0;
  double delta_e = 0.0;
  Index vertex_count = 0;
  std::string label;
};

ComplexityPair polytope_complexity(const HypothesisSet& set, const ConcentrationProfile& profile, Index n);

enum class SparseRegime { subgaussian_20, independent_2inf, subexp_02_m, subexp_02_q };
std::string to_string(SparseRegime regime);
SparseRegime parse_sparse_regime(const std::string& name);

struct SparseBound {
  double value = 0.0;
  bool out_of_regime = false;  // k > p/2
};

SparseBound sparse_cone_bound(Index k, Index p, Index n, SparseRegime regime);

double finite_gamma_bound(const Skeleton& points, int alpha, const SemiNorm& metric);

// 3 * int_0^1 [k (log(p/k) + log(9/eps))]^{1/alpha} d eps.
double dudley_sparse_bound(Index k, Index p, int alpha);

enum class BoundVersion { local, global };

struct BoundAssembly {
  BoundVersion version = BoundVersion::local;
  double q_proxy = 0.0;
  double m_proxy = 0.0;
  std::string q_label;
  std::string m_label;
  double tau = 0.0;
  double q_smallball = 0.0;
  double u = 8.0;
  Index n = 0;
  double sigma = 0.0;
  double rho = 0.0;
  double n_required = 0.0;
  double predicted_error = 0.0;
  std::string constants_convention = "all hidden constants = 1";
};

BoundAssembly assemble_bound(double q_proxy, double m_proxy, const SmallBallEstimate& smallball, double u,
                             Index n, double sigma, double rho, BoundVersion version,
                             std::string q_label = "supplied", std::string m_label = "supplied");

}  // namespace subexp
