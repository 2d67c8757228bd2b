#include "subexp/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "subexp/errors.hpp"
#include "subexp/parallel.hpp"

namespace subexp {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear: return "linear";
    case ModelKind::single_index: return "single_index";
    case ModelKind::quadratic: return "quadratic";
    case ModelKind::lifted_view: return "lifted_view";
  }
  return "unknown";
}

std::string to_string(Link link) {
  switch (link) {
    case Link::identity: return "identity";
    case Link::sign: return "sign";
    case Link::tanh: return "tanh";
    case Link::relu: return "relu";
    case Link::square: return "square";
    case Link::cube: return "cube";
    case Link::abs: return "abs";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "single_index") return ModelKind::single_index;
  if (name == "quadratic") return ModelKind::quadratic;
  if (name == "lifted_view") return ModelKind::lifted_view;
  throw ConfigError("unknown model kind '" + name + "'");
}

Link parse_link(const std::string& name) {
  if (name == "identity") return Link::identity;
  if (name == "sign") return Link::sign;
  if (name == "tanh") return Link::tanh;
  if (name == "relu") return Link::relu;
  if (name == "square") return Link::square;
  if (name == "cube") return Link::cube;
  if (name == "abs") return Link::abs;
  throw ConfigError("unknown link '" + name + "'");
}

double apply_link(Link link, double z) {
  switch (link) {
    case Link::identity: return z;
    case Link::sign: return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case Link::tanh: return std::tanh(z);
    case Link::relu: return z > 0.0 ? z : 0.0;
    case Link::square: return z * z;
    case Link::cube: return z * z * z;
    case Link::abs: return std::abs(z);
  }
  return z;
}

NoiseSpec NoiseSpec::laplace_with_std(double std) { return laplace(std / std::numbers::sqrt2); }

double NoiseSpec::std_dev() const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::gaussian: return param;
    case Kind::laplace: return std::numbers::sqrt2 * param;
  }
  return 0.0;
}

double NoiseSpec::draw(Rng& rng) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::gaussian: return param * standard_normal(rng);
    case Kind::laplace: {
      const double sign = random_sign(rng);
      return param * sign * standard_exponential(rng);
    }
  }
  return 0.0;
}

std::string NoiseSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: return "none";
    case Kind::gaussian: os << "gaussian(std=" << param << ")"; break;
    case Kind::laplace: os << "laplace(scale=" << param << ")"; break;
  }
  return os.str();
}

void ObservationModel::validate(Index p) const {
  if (beta0.size() != p) {
    throw ConfigError("beta0 has dimension " + std::to_string(beta0.size()) + ", inputs have " +
                      std::to_string(p));
  }
  if (!beta0.allFinite()) throw ConfigError("beta0 must be finite");
  if ((kind == ModelKind::single_index || kind == ModelKind::quadratic || kind == ModelKind::lifted_view) &&
      beta0.norm() == 0.0) {
    throw ConfigError("beta0 must be non-zero for " + to_string(kind) + " models");
  }
  if (!(noise.param >= 0.0) || !std::isfinite(noise.param)) throw ConfigError("noise parameter must be >= 0");
}

double ObservationModel::respond(const VectorXd& x, Rng& rng) const {
  const double z = x.dot(beta0);
  const double nu = noise.draw(rng);
  switch (kind) {
    case ModelKind::linear: return z + nu;
    case ModelKind::single_index: return apply_link(link, z) + nu;
    case ModelKind::quadratic:
    case ModelKind::lifted_view: return (z + nu) * (z + nu);
  }
  return z;
}

MatrixXd lift_rows(const MatrixXd& x, const MatrixXd& second_moment) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (second_moment.rows() != p || second_moment.cols() != p) throw DimensionError("centering matrix shape");
  MatrixXd out(n, p * p);
  for (Index i = 0; i < n; ++i) {
    const VectorXd xi = x.row(i).transpose();
    MatrixXd l = xi * xi.transpose() - second_moment;
    out.row(i) = Eigen::Map<const VectorXd>(l.data(), p * p).transpose();
  }
  return out;
}

MatrixXd lift_centering_matrix(const DistributionSpec& spec, const LiftCentering& centering,
                               std::uint64_t seed) {
  if (spec.isotropic_by_construction()) return MatrixXd::Identity(spec.dimension, spec.dimension);
  const Index m = static_cast<Index>(centering.calibration_size);
  if (m < 1) throw ConfigError("lift calibration size must be >= 1");
  const MatrixXd cal = sample_inputs(spec, m, derive_seed(seed, "lift_calibration"));
  return (cal.transpose() * cal) / static_cast<double>(m);
}

Dataset generate_dataset(const ObservationModel& model, const DistributionSpec& spec, Index n,
                         std::uint64_t seed, const LiftCentering& centering) {
  spec.validate();
  model.validate(spec.dimension);
  if (n < 1) throw ConfigError("dataset size must be >= 1");
  Dataset ds;
  const MatrixXd x = sample_inputs(spec, n, derive_seed(seed, spec.seed_domain));
  Rng noise_rng(derive_seed(seed, "noise"));
  ds.outputs.resize(n);
  for (Index i = 0; i < n; ++i) ds.outputs(i) = model.respond(x.row(i).transpose(), noise_rng);
  ds.base_dim = spec.dimension;
  ds.lifted = model.lifted();
  ds.inputs = ds.lifted ? lift_rows(x, lift_centering_matrix(spec, centering, seed)) : x;
  ds.provenance = {spec, model, seed};
  return ds;
}

// ---------------------------------------------------------------- target scalings

namespace {

struct MomentAccumulator {
  double sum = 0.0;
  double comp = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add_to_sum(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  void add(double v) {
    add_to_sum(v);
    sum_sq += v * v;
    ++count;
  }
  void merge(const MomentAccumulator& o) {
    add_to_sum(o.sum);
    sum_sq += o.sum_sq;
    count += o.count;
  }
};

ScalarEstimate finish(const MomentAccumulator& acc, double factor) {
  const double n = static_cast<double>(acc.count);
  const double mean = acc.sum / n;
  const double var = std::max(acc.sum_sq / n - mean * mean, 0.0) * n / std::max(n - 1.0, 1.0);
  return {factor * mean, std::abs(factor) * std::sqrt(var / n), acc.count};
}

template <typename Draw>
MomentAccumulator chunked_mean(std::size_t budget, std::uint64_t seed, const char* domain, Draw draw) {
  std::vector<MomentAccumulator> parts(kMcChunks);
  parallel_for(kMcChunks, [&](std::size_t c) {
    const ChunkRange r = chunk_range(budget, c);
    Rng rng(derive_seed(seed, domain, c));
    for (std::size_t i = r.begin; i < r.end; ++i) parts[c].add(draw(rng));
  });
  MomentAccumulator total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

Link effective_link(const ObservationModel& model) {
  switch (model.kind) {
    case ModelKind::linear: return Link::identity;
    case ModelKind::single_index: return model.link;
    case ModelKind::quadratic:
    case ModelKind::lifted_view: return Link::square;
  }
  return model.link;
}

}  // namespace

ScalarEstimate target_scale_mu(const ObservationModel& model, const DistributionSpec& spec,
                               std::size_t mc_budget, std::uint64_t seed) {
  spec.validate();
  if (model.beta0.size() != spec.dimension) throw ConfigError("beta0 dimension differs from spec");
  const double norm_sq = model.beta0.squaredNorm();
  if (norm_sq == 0.0) throw ConfigError("target scale needs a non-zero beta0");
  if (mc_budget < 2) throw ConfigError("target scale needs a budget of at least 2");
  const Link f = effective_link(model);

  // Independent coordinates: only the support of beta0 enters <x, beta0>.
  std::vector<Index> support;
  for (Index j = 0; j < model.beta0.size(); ++j) {
    if (model.beta0(j) != 0.0) support.push_back(j);
  }
  const bool mixed = spec.kind == DistributionKind::mixed;
  MomentAccumulator acc = chunked_mean(mc_budget, seed, "target_scale_mu", [&](Rng& rng) {
    double z = 0.0;
    if (mixed) {
      VectorXd x(spec.dimension);
      draw_vector(spec, rng, x);
      z = x.dot(model.beta0);
    } else {
      for (Index j : support) z += model.beta0(j) * draw_coordinate(spec.kind, spec.scale, rng);
    }
    return apply_link(f, z) * z;
  });
  return finish(acc, 1.0 / norm_sq);
}

ScalarEstimate lifted_target_scale(Link link, std::size_t mc_budget, std::uint64_t seed) {
  if (mc_budget < 2) throw ConfigError("target scale needs a budget of at least 2");
  MomentAccumulator acc = chunked_mean(mc_budget, seed, "lifted_target_scale", [&](Rng& rng) {
    const double z = standard_normal(rng);
    return apply_link(link, z) * (z * z - 1.0);
  });
  return finish(acc, 0.5);
}

// ---------------------------------------------------------------- mismatch

MismatchReport mismatch_report(const ObservationModel& model, const DistributionSpec& spec,
                               const VectorXd& beta_nat, const HypothesisSet* set,
                               std::optional<double> t, std::size_t mc_budget, std::uint64_t seed,
                               std::size_t n_dirs) {
  spec.validate();
  model.validate(spec.dimension);
  if (model.lifted()) throw ConfigError("mismatch report is defined for vector models");
  const Index p = spec.dimension;
  if (beta_nat.size() != p) throw DimensionError("beta_nat has wrong dimension");
  if (mc_budget < 1000) throw ConfigError("mismatch report needs a budget of at least 1000");
  if (t && *t < 0.0) throw ConfigError("t must be nonnegative");

  std::vector<double> xi(mc_budget);
  std::vector<VectorXd> sums(kMcChunks, VectorXd::Zero(p));
  std::vector<VectorXd> sums_sq(kMcChunks, VectorXd::Zero(p));
  parallel_for(kMcChunks, [&](std::size_t c) {
    const ChunkRange r = chunk_range(mc_budget, c);
    Rng rng(derive_seed(seed, "mismatch", c));
    VectorXd x(p);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      draw_vector(spec, rng, x);
      const double y = model.respond(x, rng);
      const double e = y - x.dot(beta_nat);
      xi[i] = e;
      sums[c] += e * x;
      sums_sq[c] += (e * x).cwiseAbs2();
    }
  });
  VectorXd total = VectorXd::Zero(p);
  VectorXd total_sq = VectorXd::Zero(p);
  for (std::size_t c = 0; c < kMcChunks; ++c) {
    total += sums[c];
    total_sq += sums_sq[c];
  }
  const double n = static_cast<double>(mc_budget);
  MismatchReport rep;
  rep.budget = mc_budget;
  rep.mean_correlation = total / n;
  const VectorXd var =
      ((total_sq / n) - rep.mean_correlation.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0));
  rep.mc_std_error = (var / n).cwiseSqrt();
  rep.mc_std_error_rms = std::sqrt(rep.mc_std_error.squaredNorm() / static_cast<double>(p));
  rep.sigma = psi_norm_estimate(xi, 1).value;
  rep.rho_global = rep.mean_correlation.norm();

  if (set != nullptr && t) {
    rep.t = t;
    std::vector<VectorXd> dirs;
    if (*t > 0.0) {
      dirs = sphere_slice_directions(*set, beta_nat, *t, n_dirs, derive_seed(seed, "rho_local")).directions;
      if (dirs.empty()) rep.status = "scale exceeds diameter";
    } else {
      const ConeDirections cone = cone_directions(*set, beta_nat, n_dirs, derive_seed(seed, "rho_local"));
      dirs = cone.directions;
      if (cone.degenerate) rep.status = "degenerate cone";
    }
    rep.local_directions = dirs.size();
    if (!dirs.empty()) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& v : dirs) best = std::max(best, rep.mean_correlation.dot(v));
      rep.rho_local = best;
    }
  }
  return rep;
}

}  // namespace subexp
