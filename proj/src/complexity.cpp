#include "subexp/complexity.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>

#include "subexp/errors.hpp"
#include "subexp/parallel.hpp"

namespace subexp {

std::string to_string(WidthKind kind) {
  switch (kind) {
    case WidthKind::gaussian: return "gaussian";
    case WidthKind::exponential: return "exponential";
    case WidthKind::empirical: return "empirical";
  }
  return "unknown";
}

std::string to_string(SparseRegime regime) {
  switch (regime) {
    case SparseRegime::subgaussian_20: return "(2,0)";
    case SparseRegime::independent_2inf: return "(2,inf)";
    case SparseRegime::subexp_02_m: return "(0,2)-m";
    case SparseRegime::subexp_02_q: return "(0,2)-q";
  }
  return "unknown";
}

SparseRegime parse_sparse_regime(const std::string& name) {
  if (name == "(2,0)" || name == "2,0") return SparseRegime::subgaussian_20;
  if (name == "(2,inf)" || name == "2,inf") return SparseRegime::independent_2inf;
  if (name == "(0,2)-m" || name == "0,2-m") return SparseRegime::subexp_02_m;
  if (name == "(0,2)-q" || name == "0,2-q") return SparseRegime::subexp_02_q;
  throw ConfigError("unknown sparse regime '" + name + "'");
}

// ---------------------------------------------------------------- widths

namespace {

using SupFn = std::function<double(const VectorXd&)>;
using DrawFn = std::function<void(Rng&, VectorXd&)>;

WidthEstimate width_mc(const SupFn& sup, Index dim, const DrawFn& draw, std::size_t trials, std::uint64_t seed,
                       WidthKind kind, std::string target) {
  if (trials < 100) throw ConfigError("width estimates need at least 100 trials");
  std::vector<double> values(trials);
  parallel_for(kMcChunks, [&](std::size_t c) {
    const ChunkRange r = chunk_range(trials, c);
    Rng rng(derive_seed(seed, "width_" + to_string(kind), c));
    VectorXd g(dim);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      draw(rng, g);
      values[i] = sup(g);
    }
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(trials);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  WidthEstimate w;
  w.mean = mean;
  w.std_error = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
  w.trials = trials;
  w.kind = kind;
  w.target = std::move(target);
  return w;
}

SupFn skeleton_sup(const Skeleton& s) {
  return [&s](const VectorXd& g) { return (s.points * g).maxCoeff(); };
}

SupFn set_sup(const HypothesisSet& k) {
  return [&k](const VectorXd& g) { return k.support(g); };
}

void draw_gaussian(Rng& rng, VectorXd& g) {
  for (Index j = 0; j < g.size(); ++j) g(j) = standard_normal(rng);
}

void draw_exponential(Rng& rng, VectorXd& g) {
  for (Index j = 0; j < g.size(); ++j) {
    const double s = random_sign(rng);
    g(j) = s * standard_exponential(rng);
  }
}

DrawFn draw_symmetrized(const DistributionSpec& spec, Index n) {
  return [spec, n](Rng& rng, VectorXd& h) {
    h.setZero();
    VectorXd x(spec.dimension);
    for (Index i = 0; i < n; ++i) {
      draw_vector(spec, rng, x);
      h += random_sign(rng) * x;
    }
    h /= std::sqrt(static_cast<double>(n));
  };
}

std::string skeleton_label(const Skeleton& s) {
  return "skeleton(" + std::to_string(s.size()) + " points, p=" + std::to_string(s.dimension()) + ")";
}

}  // namespace

WidthEstimate gaussian_width(const Skeleton& target, std::size_t trials, std::uint64_t seed) {
  return width_mc(skeleton_sup(target), target.dimension(), draw_gaussian, trials, seed, WidthKind::gaussian,
                  skeleton_label(target));
}

WidthEstimate gaussian_width(const HypothesisSet& target, std::size_t trials, std::uint64_t seed) {
  return width_mc(set_sup(target), target.ambient(), draw_gaussian, trials, seed, WidthKind::gaussian,
                  target.describe());
}

WidthEstimate exponential_width(const Skeleton& target, std::size_t trials, std::uint64_t seed) {
  return width_mc(skeleton_sup(target), target.dimension(), draw_exponential, trials, seed,
                  WidthKind::exponential, skeleton_label(target));
}

WidthEstimate exponential_width(const HypothesisSet& target, std::size_t trials, std::uint64_t seed) {
  return width_mc(set_sup(target), target.ambient(), draw_exponential, trials, seed, WidthKind::exponential,
                  target.describe());
}

WidthEstimate empirical_width(const Skeleton& target, const DistributionSpec& spec, Index n, std::size_t trials,
                              std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw ConfigError("empirical width needs n >= 1");
  if (spec.dimension != target.dimension()) throw DimensionError("spec and skeleton dimensions differ");
  WidthEstimate w = width_mc(skeleton_sup(target), target.dimension(), draw_symmetrized(spec, n), trials, seed,
                             WidthKind::empirical, skeleton_label(target));
  w.n = n;
  return w;
}

WidthEstimate empirical_width(const HypothesisSet& target, const DistributionSpec& spec, Index n,
                              std::size_t trials, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw ConfigError("empirical width needs n >= 1");
  if (spec.dimension != target.ambient()) throw DimensionError("spec and set dimensions differ");
  WidthEstimate w = width_mc(set_sup(target), target.ambient(), draw_symmetrized(spec, n), trials, seed,
                             WidthKind::empirical, target.describe());
  w.n = n;
  return w;
}

// ---------------------------------------------------------------- small ball

namespace {

struct DirectionMoments {
  VectorXd abs_sum, sq_sum, quad_sum;
  Eigen::VectorXi hits;
};

// Accumulates per-direction moments of <x, v>; hits counts |<x,v>| >= threshold.
DirectionMoments scan_directions(const DistributionSpec& spec, const MatrixXd& v, std::size_t trials,
                                 std::uint64_t seed, double threshold) {
  const Index d = v.cols();
  std::vector<DirectionMoments> parts(kMcChunks);
  parallel_for(kMcChunks, [&](std::size_t c) {
    DirectionMoments& m = parts[c];
    m.abs_sum = VectorXd::Zero(d);
    m.sq_sum = VectorXd::Zero(d);
    m.quad_sum = VectorXd::Zero(d);
    m.hits = Eigen::VectorXi::Zero(d);
    const ChunkRange r = chunk_range(trials, c);
    Rng rng(derive_seed(seed, "small_ball", c));
    constexpr Index kBatch = 2048;
    MatrixXd x(kBatch, spec.dimension);
    VectorXd row(spec.dimension);
    for (std::size_t start = r.begin; start < r.end; start += kBatch) {
      const Index b = static_cast<Index>(std::min<std::size_t>(kBatch, r.end - start));
      for (Index i = 0; i < b; ++i) {
        draw_vector(spec, rng, row);
        x.row(i) = row.transpose();
      }
      const MatrixXd proj = x.topRows(b) * v;
      const Eigen::ArrayXXd a = proj.array().abs();
      m.abs_sum += a.colwise().sum().matrix().transpose();
      const Eigen::ArrayXXd sq = a.square();
      m.sq_sum += sq.colwise().sum().matrix().transpose();
      m.quad_sum += sq.square().colwise().sum().matrix().transpose();
      m.hits += (a >= threshold).cast<int>().colwise().sum().matrix().transpose();
    }
  });
  DirectionMoments total = parts[0];
  for (std::size_t c = 1; c < kMcChunks; ++c) {
    total.abs_sum += parts[c].abs_sum;
    total.sq_sum += parts[c].sq_sum;
    total.quad_sum += parts[c].quad_sum;
    total.hits += parts[c].hits;
  }
  return total;
}

}  // namespace

SmallBallEstimate small_ball_report(const DistributionSpec& spec, const std::vector<VectorXd>& directions,
                                    ThetaRule rule, std::size_t trials, std::uint64_t seed) {
  spec.validate();
  if (directions.empty()) throw ConfigError("small-ball report needs at least one direction");
  if (trials < 2) throw ConfigError("small-ball report needs at least 2 trials");
  if (rule.kind == ThetaRule::Kind::fixed && !(rule.theta >= 0.0)) throw ConfigError("theta must be >= 0");
  MatrixXd v(spec.dimension, static_cast<Index>(directions.size()));
  for (std::size_t j = 0; j < directions.size(); ++j) {
    if (directions[j].size() != spec.dimension) throw DimensionError("direction dimension differs from spec");
    v.col(static_cast<Index>(j)) = directions[j];
  }
  const double n = static_cast<double>(trials);

  SmallBallEstimate est;
  est.direction_count = directions.size();
  est.trials = trials;

  // First pass: alpha and delta. Hits at a fixed theta are collected here too.
  const double first_threshold = rule.kind == ThetaRule::Kind::fixed ? 2.0 * rule.theta : 0.0;
  const DirectionMoments m1 = scan_directions(spec, v, trials, seed, first_threshold);
  const VectorXd mean_abs = m1.abs_sum / n;
  const VectorXd mean_sq = m1.sq_sum / n;
  Index arg_alpha = 0;
  Index arg_delta = 0;
  est.alpha_hat = mean_abs.minCoeff(&arg_alpha);
  est.delta_hat = mean_sq.maxCoeff(&arg_delta);
  est.alpha_std_error =
      std::sqrt(std::max(mean_sq(arg_alpha) - est.alpha_hat * est.alpha_hat, 0.0) / (n - 1.0));
  est.delta_std_error =
      std::sqrt(std::max(m1.quad_sum(arg_delta) / n - est.delta_hat * est.delta_hat, 0.0) / (n - 1.0));
  est.pz_bound = est.delta_hat > 0.0 ? std::pow(est.alpha_hat, 3) / (16.0 * est.delta_hat) : 0.0;
  if (est.delta_hat > 0.0) {
    const double da = 3.0 * est.alpha_hat * est.alpha_hat / (16.0 * est.delta_hat);
    const double dd = std::pow(est.alpha_hat, 3) / (16.0 * est.delta_hat * est.delta_hat);
    est.pz_std_error = std::hypot(da * est.alpha_std_error, dd * est.delta_std_error);
  }
  est.degenerate = est.alpha_hat <= 3.0 * est.alpha_std_error;
  if (est.alpha_hat > 0.0) est.tau = est.alpha_hat / 4.0;

  Eigen::VectorXi hits = m1.hits;
  if (rule.kind == ThetaRule::Kind::fixed) {
    est.theta = rule.theta;
  } else {
    est.theta = est.alpha_hat / 4.0;
    if (!est.degenerate) hits = scan_directions(spec, v, trials, seed, 2.0 * est.theta).hits;
  }
  if (rule.kind == ThetaRule::Kind::paley_zygmund && est.degenerate) {
    est.q_hat = 0.0;
  } else {
    est.q_hat = static_cast<double>(hits.minCoeff()) / n;
  }
  est.q_std_error = std::sqrt(est.q_hat * (1.0 - est.q_hat) / n);

  if (rule.kind == ThetaRule::Kind::paley_zygmund) {
    const double tau = est.tau.value_or(0.0);
    est.pz_allowance = 3.0 * (tau * est.q_std_error + est.pz_std_error);
    est.pz_holds = tau * est.q_hat >= est.pz_bound - est.pz_allowance;
  }
  return est;
}

// ---------------------------------------------------------------- closed-form bounds

ComplexityPair polytope_complexity(const HypothesisSet& set, const ConcentrationProfile& profile, Index n) {
  if (!set.polytopal()) throw ConfigError("polytope complexity needs a polytopal set");
  if (n < 1) throw ConfigError("n must be >= 1");
  const MatrixXd v = set.vertices();
  ComplexityPair out;
  out.vertex_count = v.cols();
  out.label = "polytope bound over " + std::to_string(v.cols()) + " vertices";
  for (Index i = 0; i < v.cols(); ++i) {
    for (Index j = i + 1; j < v.cols(); ++j) {
      const VectorXd d = v.col(i) - v.col(j);
      out.delta_g = std::max(out.delta_g, profile.g(d));
      out.delta_e = std::max(out.delta_e, profile.e(d));
    }
  }
  const double log_d = std::log(static_cast<double>(v.cols()));
  out.q_bound = out.delta_e * log_d / std::sqrt(static_cast<double>(n)) + (out.delta_g + out.delta_e) * std::sqrt(log_d);
  out.m_bound = out.delta_e * log_d + out.delta_g * std::sqrt(log_d);
  return out;
}

SparseBound sparse_cone_bound(Index k, Index p, Index n, SparseRegime regime) {
  if (k < 1 || k > p) throw ConfigError("sparse bound needs 1 <= k <= p");
  if (n < 1) throw ConfigError("n must be >= 1");
  const double kd = static_cast<double>(k);
  const double lr = std::log(static_cast<double>(p) / kd);
  SparseBound out;
  out.out_of_regime = 2 * k > p;
  switch (regime) {
    case SparseRegime::subgaussian_20: out.value = std::sqrt(kd * lr); break;
    case SparseRegime::independent_2inf: out.value = std::sqrt(kd * lr * std::log(static_cast<double>(p))); break;
    case SparseRegime::subexp_02_m: out.value = kd * lr; break;
    case SparseRegime::subexp_02_q:
      out.value = kd / std::sqrt(static_cast<double>(n)) * lr + std::sqrt(kd * lr);
      break;
  }
  return out;
}

double finite_gamma_bound(const Skeleton& points, int alpha, const SemiNorm& metric) {
  if (points.size() < 1) throw ConfigError("finite gamma bound needs at least one point");
  if (alpha != 1 && alpha != 2) throw ConfigError("alpha must be 1 or 2");
  if (points.size() == 1) return 0.0;
  const double diam = points.diameter(metric);
  return diam * std::pow(std::log(static_cast<double>(points.size())), 1.0 / alpha);
}

double dudley_sparse_bound(Index k, Index p, int alpha) {
  if (k < 1 || k > p) throw ConfigError("Dudley bound needs 1 <= k <= p");
  if (alpha != 1 && alpha != 2) throw ConfigError("alpha must be 1 or 2");
  const double kd = static_cast<double>(k);
  const double base = std::log(static_cast<double>(p) / kd) + std::log(9.0);
  // eps = e^{-s} turns the log singularity at 0 into an exponentially damped tail.
  auto f = [&](double s) { return std::pow(kd * (base + s), 1.0 / alpha) * std::exp(-s); };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-9, &error);
  return 3.0 * value;
}

BoundAssembly assemble_bound(double q_proxy, double m_proxy, const SmallBallEstimate& smallball, double u,
                             Index n, double sigma, double rho, BoundVersion version, std::string q_label,
                             std::string m_label) {
  if (u < 8.0) throw ConfigError("confidence parameter u must be >= 8");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(q_proxy >= 0.0) || !(m_proxy >= 0.0) || !(sigma >= 0.0)) {
    throw ConfigError("complexity proxies and sigma must be nonnegative");
  }
  if (smallball.degenerate || !smallball.tau) throw ConfigError("small-ball estimate is degenerate");
  const double tau = *smallball.tau;
  const double tq = tau * smallball.q_hat;
  if (!(tq > 0.0)) throw ConfigError("degenerate small-ball estimate: tau * Q = 0");

  BoundAssembly b;
  b.version = version;
  b.q_proxy = q_proxy;
  b.m_proxy = m_proxy;
  b.q_label = std::move(q_label);
  b.m_label = std::move(m_label);
  b.tau = tau;
  b.q_smallball = smallball.q_hat;
  b.u = u;
  b.n = n;
  b.sigma = sigma;
  b.rho = rho;
  b.n_required = std::pow((q_proxy + tau * u) / tq, 2);
  const double nd = static_cast<double>(n);
  if (version == BoundVersion::local) {
    b.predicted_error = std::max(0.0, rho + u * u * sigma * m_proxy / std::sqrt(nd)) / (tq * tq);
  } else {
    b.predicted_error = std::max(1.0, 1.0 / (tq * tq)) *
                        std::max(0.0, rho + std::max(1.0, u * u * sigma) * std::sqrt(m_proxy) / std::pow(nd, 0.25));
  }
  return b;
}

}  // namespace subexp
