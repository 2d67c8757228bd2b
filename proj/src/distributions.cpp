#include "subexp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "subexp/errors.hpp"
#include "subexp/parallel.hpp"

namespace subexp {

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::gaussian: return "gaussian";
    case DistributionKind::rademacher: return "rademacher";
    case DistributionKind::laplace: return "laplace";
    case DistributionKind::symmetric_exponential: return "symmetric_exponential";
    case DistributionKind::mixed: return "mixed";
  }
  return "unknown";
}

DistributionKind parse_distribution_kind(const std::string& name) {
  if (name == "gaussian") return DistributionKind::gaussian;
  if (name == "rademacher") return DistributionKind::rademacher;
  if (name == "laplace") return DistributionKind::laplace;
  if (name == "symmetric_exponential") return DistributionKind::symmetric_exponential;
  if (name == "mixed") return DistributionKind::mixed;
  throw ConfigError("unknown distribution kind '" + name + "'");
}

double unit_variance_scale(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::gaussian:
    case DistributionKind::rademacher: return 1.0;
    case DistributionKind::laplace:
    case DistributionKind::symmetric_exponential: return 1.0 / std::numbers::sqrt2;
    case DistributionKind::mixed: break;
  }
  throw ConfigError("unit variance scale is undefined for mixed specs");
}

double coordinate_variance(DistributionKind kind, double scale) {
  switch (kind) {
    case DistributionKind::gaussian:
    case DistributionKind::rademacher: return scale * scale;
    case DistributionKind::laplace:
    case DistributionKind::symmetric_exponential: return 2.0 * scale * scale;
    case DistributionKind::mixed: break;
  }
  throw ConfigError("coordinate variance needs a base kind");
}

double coordinate_abs_moment(DistributionKind kind, double scale, double q) {
  switch (kind) {
    case DistributionKind::gaussian:
      return std::pow(scale, q) * std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) /
             std::sqrt(std::numbers::pi);
    case DistributionKind::rademacher: return std::pow(scale, q);
    case DistributionKind::laplace:
    case DistributionKind::symmetric_exponential: return std::pow(scale, q) * std::tgamma(q + 1.0);
    case DistributionKind::mixed: break;
  }
  throw ConfigError("coordinate moments need a base kind");
}

DistributionSpec DistributionSpec::unit_variance(DistributionKind kind, Index p) {
  DistributionSpec s;
  s.kind = kind;
  s.dimension = p;
  s.scale = unit_variance_scale(kind);
  return s;
}

DistributionSpec DistributionSpec::mixed_from(DistributionKind base, const MatrixXd& m, double scale) {
  DistributionSpec s;
  s.kind = DistributionKind::mixed;
  s.base_kind = base;
  s.dimension = m.rows();
  s.mixing = m;
  s.scale = scale;
  return s;
}

void DistributionSpec::validate() const {
  if (dimension < 1) throw ConfigError("distribution dimension must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("distribution scale must be positive");
  if (kind == DistributionKind::mixed) {
    if (base_kind == DistributionKind::mixed) throw ConfigError("mixed spec needs a non-mixed base kind");
    if (!mixing) throw ConfigError("mixed spec requires a mixing matrix");
    if (mixing->rows() != dimension) throw ConfigError("mixing matrix must have p rows");
    if (mixing->cols() < 1) throw ConfigError("mixing matrix must have at least one column");
    if (!mixing->allFinite()) throw ConfigError("mixing matrix has non-finite entries");
  } else if (mixing) {
    throw ConfigError("mixing matrix given for a non-mixed spec");
  }
}

Index DistributionSpec::latent_dimension() const {
  return kind == DistributionKind::mixed ? mixing->cols() : dimension;
}

bool DistributionSpec::isotropic_by_construction() const {
  if (kind == DistributionKind::mixed) return false;
  return std::abs(coordinate_variance(kind, scale) - 1.0) <= 1e-12;
}

MatrixXd DistributionSpec::second_moment() const {
  const double var = coordinate_variance(coordinate_kind(), scale);
  if (kind == DistributionKind::mixed) return var * (*mixing) * mixing->transpose();
  return var * MatrixXd::Identity(dimension, dimension);
}

double draw_coordinate(DistributionKind kind, double scale, Rng& rng) {
  switch (kind) {
    case DistributionKind::gaussian: return scale * standard_normal(rng);
    case DistributionKind::rademacher: return scale * random_sign(rng);
    case DistributionKind::laplace:
    case DistributionKind::symmetric_exponential: {
      const double sign = random_sign(rng);
      return scale * sign * standard_exponential(rng);
    }
    case DistributionKind::mixed: break;
  }
  throw ConfigError("cannot draw a coordinate of kind mixed");
}

void draw_vector(const DistributionSpec& spec, Rng& rng, Eigen::Ref<VectorXd> out) {
  if (spec.kind == DistributionKind::mixed) {
    VectorXd z(spec.mixing->cols());
    for (Index j = 0; j < z.size(); ++j) z(j) = draw_coordinate(spec.base_kind, spec.scale, rng);
    out.noalias() = (*spec.mixing) * z;
    return;
  }
  for (Index j = 0; j < spec.dimension; ++j) out(j) = draw_coordinate(spec.kind, spec.scale, rng);
}

MatrixXd sample_inputs(const DistributionSpec& spec, Index n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw ConfigError("sample size must be >= 1");
  Rng rng(seed);
  MatrixXd x(n, spec.dimension);
  VectorXd row(spec.dimension);
  for (Index i = 0; i < n; ++i) {
    draw_vector(spec, rng, row);
    x.row(i) = row.transpose();
  }
  return x;
}

// ---------------------------------------------------------------- semi-norms

SemiNorm SemiNorm::zero() { return SemiNorm{}; }

SemiNorm SemiNorm::euclidean_scaled(double c) {
  SemiNorm s;
  s.kind_ = Kind::euclidean_scaled;
  s.scale_ = c;
  return s;
}

SemiNorm SemiNorm::infinity_scaled(double c) {
  SemiNorm s;
  s.kind_ = Kind::infinity_scaled;
  s.scale_ = c;
  return s;
}

SemiNorm SemiNorm::mt_euclidean(const MatrixXd& m, double c) {
  SemiNorm s;
  s.kind_ = Kind::mt_euclidean;
  s.scale_ = c;
  s.mixing_ = m;
  return s;
}

SemiNorm SemiNorm::mt_infinity(const MatrixXd& m, double c) {
  SemiNorm s;
  s.kind_ = Kind::mt_infinity;
  s.scale_ = c;
  s.mixing_ = m;
  return s;
}

SemiNorm SemiNorm::frobenius_scaled(double c, Index p) {
  SemiNorm s;
  s.kind_ = Kind::frobenius_scaled;
  s.scale_ = c;
  s.matrix_dim_ = p;
  return s;
}

SemiNorm SemiNorm::operator_scaled(double c, Index p) {
  SemiNorm s;
  s.kind_ = Kind::operator_scaled;
  s.scale_ = c;
  s.matrix_dim_ = p;
  return s;
}

std::optional<Index> SemiNorm::expected_dimension() const {
  switch (kind_) {
    case Kind::mt_euclidean:
    case Kind::mt_infinity: return mixing_.rows();
    case Kind::frobenius_scaled:
    case Kind::operator_scaled: return matrix_dim_ * matrix_dim_;
    default: return std::nullopt;
  }
}

std::string SemiNorm::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::euclidean_scaled: os << "euclidean_scaled(" << scale_ << ")"; break;
    case Kind::infinity_scaled: os << "infinity_scaled(" << scale_ << ")"; break;
    case Kind::mt_euclidean: os << "mt_euclidean(M " << mixing_.rows() << "x" << mixing_.cols() << ", " << scale_ << ")"; break;
    case Kind::mt_infinity: os << "mt_infinity(M " << mixing_.rows() << "x" << mixing_.cols() << ", " << scale_ << ")"; break;
    case Kind::frobenius_scaled: os << "frobenius_scaled(" << scale_ << ")"; break;
    case Kind::operator_scaled: os << "operator_scaled(" << scale_ << ")"; break;
  }
  return os.str();
}

double SemiNorm::operator()(const VectorXd& v) const {
  if (auto d = expected_dimension(); d && v.size() != *d) {
    throw DimensionError("semi-norm " + describe() + " expects dimension " + std::to_string(*d) +
                         ", got " + std::to_string(v.size()));
  }
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::euclidean_scaled: return scale_ * v.norm();
    case Kind::infinity_scaled: return v.size() == 0 ? 0.0 : scale_ * v.cwiseAbs().maxCoeff();
    case Kind::mt_euclidean: return scale_ * (mixing_.transpose() * v).norm();
    case Kind::mt_infinity: {
      const VectorXd w = mixing_.transpose() * v;
      return w.size() == 0 ? 0.0 : scale_ * w.cwiseAbs().maxCoeff();
    }
    case Kind::frobenius_scaled: return scale_ * v.norm();
    case Kind::operator_scaled: {
      const Eigen::Map<const MatrixXd> m(v.data(), matrix_dim_, matrix_dim_);
      if (matrix_dim_ == 0) return 0.0;
      Eigen::JacobiSVD<MatrixXd> svd(m);
      return scale_ * svd.singularValues()(0);
    }
  }
  return 0.0;
}

SemiNorm SemiNorm::scaled(double factor) const {
  SemiNorm s = *this;
  s.scale_ *= factor;
  return s;
}

double ConcentrationProfile::tail_bound(const VectorXd& v, double t) const {
  const double gv = g(v);
  const double ev = e(v);
  auto ratio = [t](double num, double den) {
    if (den > 0.0) return num / den;
    return t > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  const double exponent = std::min(ratio(t * t, gv * gv), ratio(t, ev));
  return 2.0 * std::exp(-exponent);
}

ConcentrationProfile ConcentrationProfile::with_constants(double g_mult, double e_mult) const {
  ConcentrationProfile p = *this;
  p.g_constant = g_mult;
  p.e_constant = e_mult;
  return p;
}

void ConcentrationProfile::validate() const {
  if (g_norm.is_zero() && e_norm.is_zero()) throw ConfigError("profile has two zero semi-norms");
  if (!(g_constant > 0.0) || !(e_constant > 0.0)) throw ConfigError("profile constants must be positive");
}

// ---------------------------------------------------------------- Orlicz proxies

std::vector<double> default_q_grid() { return {1.0, 2.0, 4.0, 8.0, 16.0}; }

namespace {

void check_grid(const std::vector<double>& q_grid) {
  if (q_grid.empty()) throw ConfigError("q grid must be non-empty");
  for (double q : q_grid) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw ConfigError("q grid entries must lie in [1, inf)");
  }
}

}  // namespace

OrliczEstimate psi_norm_estimate(std::span<const double> samples, int alpha,
                                 const std::vector<double>& q_grid) {
  if (samples.empty()) throw ConfigError("psi-norm estimate needs at least one sample");
  if (alpha != 1 && alpha != 2) throw ConfigError("alpha must be 1 or 2");
  check_grid(q_grid);
  OrliczEstimate est{alpha, 0.0, q_grid, samples.size()};
  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return est;
  for (double q : q_grid) {
    double acc = 0.0;
    for (double s : samples) acc += std::pow(std::abs(s) / peak, q);
    const double moment = peak * std::pow(acc / static_cast<double>(samples.size()), 1.0 / q);
    est.value = std::max(est.value, moment / std::pow(q, 1.0 / alpha));
  }
  return est;
}

double coordinate_psi_proxy(DistributionKind kind, double scale, int alpha,
                            const std::vector<double>& q_grid) {
  check_grid(q_grid);
  double best = 0.0;
  for (double q : q_grid) {
    const double m = std::pow(coordinate_abs_moment(kind, scale, q), 1.0 / q);
    best = std::max(best, m / std::pow(q, 1.0 / alpha));
  }
  return best;
}

// ---------------------------------------------------------------- profiles

namespace {

bool subgaussian_coordinates(DistributionKind k) {
  return k == DistributionKind::gaussian || k == DistributionKind::rademacher;
}

}  // namespace

ConcentrationProfile profile_for(const DistributionSpec& spec, ProfileVariant variant) {
  spec.validate();
  const DistributionKind base = spec.coordinate_kind();
  const bool mixed = spec.kind == DistributionKind::mixed;
  ConcentrationProfile prof;
  switch (variant) {
    case ProfileVariant::natural: {
      if (subgaussian_coordinates(base)) {
        const double c = coordinate_psi_proxy(base, spec.scale, 2);
        prof.g_norm = mixed ? SemiNorm::mt_euclidean(*spec.mixing, c) : SemiNorm::euclidean_scaled(c);
        prof.e_norm = SemiNorm::zero();
      } else {
        const double r = coordinate_psi_proxy(base, spec.scale, 1);
        prof.g_norm = mixed ? SemiNorm::mt_euclidean(*spec.mixing, r) : SemiNorm::euclidean_scaled(r);
        prof.e_norm = mixed ? SemiNorm::mt_infinity(*spec.mixing, r) : SemiNorm::infinity_scaled(r);
      }
      break;
    }
    case ProfileVariant::uniform_subexponential: {
      // sup over unit v of the psi_1 proxy of <x, v>: either an axis marginal or,
      // for spread v, an asymptotically Gaussian marginal of the same variance.
      const double coord = coordinate_psi_proxy(base, spec.scale, 1);
      const double gauss = coordinate_psi_proxy(DistributionKind::gaussian,
                                                std::sqrt(coordinate_variance(base, spec.scale)), 1);
      double r = std::max(coord, gauss);
      if (mixed) r *= Eigen::JacobiSVD<MatrixXd>(*spec.mixing).singularValues()(0);
      prof.g_norm = SemiNorm::zero();
      prof.e_norm = SemiNorm::euclidean_scaled(r);
      break;
    }
    case ProfileVariant::lifted: {
      const double r = coordinate_psi_proxy(base, spec.scale, 2);
      prof.g_norm = SemiNorm::frobenius_scaled(r * r, spec.dimension);
      prof.e_norm = SemiNorm::operator_scaled(r * r, spec.dimension);
      break;
    }
  }
  return prof;
}

TailConstants sufficient_tail_constants(const DistributionSpec& spec) {
  spec.validate();
  const DistributionKind base = spec.coordinate_kind();
  switch (base) {
    case DistributionKind::gaussian: {
      // g(v) must reach sqrt(2) s ||v||; the proxy is s sqrt(2/pi).
      return {std::sqrt(std::numbers::pi), 1.0};
    }
    case DistributionKind::rademacher: return {std::numbers::sqrt2, 1.0};
    case DistributionKind::laplace:
    case DistributionKind::symmetric_exponential: {
      // Tail 2 exp(-min{t^2/(8 b^2 |v|_2^2), t/(2 sqrt 2 b |v|_inf)}); proxy R = b.
      const double m = 2.0 * std::numbers::sqrt2;
      return {m, m};
    }
    case DistributionKind::mixed: break;
  }
  throw ConfigError("no base kind");
}

// ---------------------------------------------------------------- tail verification

TailReport verify_bernstein_tail(const DistributionSpec& spec, const ConcentrationProfile& profile,
                                 const VectorXd& v, const std::vector<double>& thresholds,
                                 std::size_t mc_trials, std::uint64_t seed) {
  spec.validate();
  if (v.size() != spec.dimension) throw DimensionError("direction dimension differs from spec");
  if (mc_trials < 1000) throw ConfigError("tail verification needs at least 1000 trials");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw ConfigError("thresholds must be sorted");

  TailReport rep;
  rep.thresholds = thresholds;
  rep.trials = mc_trials;
  rep.g_value = profile.g(v);
  rep.e_value = profile.e(v);

  std::vector<std::vector<std::size_t>> counts(kMcChunks, std::vector<std::size_t>(thresholds.size(), 0));
  std::vector<char> nonzero(kMcChunks, 0);
  parallel_for(kMcChunks, [&](std::size_t c) {
    const ChunkRange r = chunk_range(mc_trials, c);
    Rng rng(derive_seed(seed, "bernstein_tail", c));
    VectorXd x(spec.dimension);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      draw_vector(spec, rng, x);
      const double a = std::abs(x.dot(v));
      if (a != 0.0) nonzero[c] = 1;
      for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (a >= thresholds[k]) ++counts[c][k];
      }
    }
  });

  const bool degenerate_profile = rep.g_value == 0.0 && rep.e_value == 0.0;
  rep.profile_failure =
      degenerate_profile && std::any_of(nonzero.begin(), nonzero.end(), [](char b) { return b != 0; });

  const double n = static_cast<double>(mc_trials);
  double needed = 0.0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    std::size_t total = 0;
    for (std::size_t c = 0; c < kMcChunks; ++c) total += counts[c][k];
    const double p_hat = static_cast<double>(total) / n;
    const double t = thresholds[k];
    const double b = profile.tail_bound(v, t);
    rep.empirical_tail.push_back(p_hat);
    rep.bound.push_back(b);
    const double bc = std::min(b, 1.0);
    if (p_hat > bc + 3.0 * std::sqrt(bc * (1.0 - bc) / n)) ++rep.violations;

    if (p_hat > 0.0 && t > 0.0) {
      const double level = std::log(2.0 / p_hat);
      const double via_g = rep.g_value > 0.0 ? t / (rep.g_value * std::sqrt(level))
                                             : std::numeric_limits<double>::infinity();
      const double via_e = rep.e_value > 0.0 ? t / (rep.e_value * level)
                                             : std::numeric_limits<double>::infinity();
      needed = std::max(needed, std::min(via_g, via_e));
    }
  }
  rep.min_constant_multiplier = needed;
  return rep;
}

double xi_norm_concentration_check(std::span<const double> xi) {
  if (xi.empty()) throw ConfigError("xi sample must be non-empty");
  const double proxy = psi_norm_estimate(xi, 1).value;
  double ss = 0.0;
  for (double v : xi) ss += v * v;
  if (proxy == 0.0) return 0.0;
  return std::sqrt(ss) / (std::sqrt(static_cast<double>(xi.size())) * proxy);
}

}  // namespace subexp
