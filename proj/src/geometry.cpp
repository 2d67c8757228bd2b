#include "subexp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "subexp/errors.hpp"

namespace subexp {

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::l1_ball: return "l1_ball";
    case SetKind::l2_ball: return "l2_ball";
    case SetKind::hypercube: return "hypercube";
    case SetKind::polytope: return "polytope";
    case SetKind::lifted_psd_fro: return "lifted_psd_fro";
  }
  return "unknown";
}

SetKind parse_set_kind(const std::string& name) {
  if (name == "l1_ball") return SetKind::l1_ball;
  if (name == "l2_ball") return SetKind::l2_ball;
  if (name == "hypercube") return SetKind::hypercube;
  if (name == "polytope") return SetKind::polytope;
  if (name == "lifted_psd_fro") return SetKind::lifted_psd_fro;
  throw ConfigError("unknown set kind '" + name + "'");
}

// ---------------------------------------------------------------- closed-form projections

VectorXd project_l1_ball(const VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(v.size());
  for (Index i = 0; i < v.size(); ++i) u[i] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] > candidate) theta = candidate;
  }
  VectorXd w(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v(i)) - theta, 0.0);
    w(i) = v(i) < 0.0 ? -mag : mag;
  }
  return w;
}

VectorXd project_l2_ball(const VectorXd& v, double radius, const VectorXd& center) {
  const VectorXd d = v - center;
  const double n = d.norm();
  if (n <= radius) return v;
  return center + (radius / n) * d;
}

VectorXd project_hypercube(const VectorXd& v, double halfwidth) {
  return v.cwiseMax(-halfwidth).cwiseMin(halfwidth);
}

MatrixXd project_psd(const MatrixXd& m) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  const VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

// ---------------------------------------------------------------- Wolfe min-norm point

namespace {

// Minimizer of ||sum mu_i q_i|| over the affine hull of the active columns.
VectorXd affine_minimizer(const MatrixXd& q, const std::vector<Index>& active) {
  const std::size_t s = active.size();
  VectorXd mu = VectorXd::Zero(static_cast<Index>(s));
  if (s == 1) {
    mu(0) = 1.0;
    return mu;
  }
  const VectorXd q0 = q.col(active[0]);
  MatrixXd d(q.rows(), static_cast<Index>(s - 1));
  for (std::size_t i = 1; i < s; ++i) d.col(static_cast<Index>(i - 1)) = q.col(active[i]) - q0;
  const VectorXd w = d.colPivHouseholderQr().solve(-q0);
  mu(0) = 1.0 - w.sum();
  mu.tail(static_cast<Index>(s - 1)) = w;
  return mu;
}

}  // namespace

MinNormResult nearest_in_hull(const MatrixXd& points, const VectorXd& target, double tol) {
  if (points.cols() < 1) throw ConfigError("hull needs at least one point");
  if (points.rows() != target.size()) throw DimensionError("hull point dimension differs from target");
  const Index m = points.cols();
  const MatrixXd q = points.colwise() - target;
  const VectorXd sq = q.colwise().squaredNorm();
  const double scale = std::max(sq.maxCoeff(), 1e-300);

  Index start = 0;
  sq.minCoeff(&start);
  std::vector<Index> active{start};
  VectorXd lambda = VectorXd::Ones(1);
  VectorXd x = q.col(start);

  int iters = 0;
  const int max_major = static_cast<int>(50 * (m + q.rows()) + 100);
  for (; iters < max_major; ++iters) {
    const VectorXd proj = q.transpose() * x;
    Index j = 0;
    const double best = proj.minCoeff(&j);
    const double xx = x.squaredNorm();
    if (xx - best <= tol * scale) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.conservativeResize(lambda.size() + 1);
    lambda(lambda.size() - 1) = 0.0;

    for (int minor = 0; minor < 10 * static_cast<int>(q.rows() + 2); ++minor) {
      const VectorXd mu = affine_minimizer(q, active);
      if ((mu.array() > 1e-15).all()) {
        lambda = mu;
        break;
      }
      double theta = 1.0;
      for (Index i = 0; i < mu.size(); ++i) {
        if (mu(i) <= 1e-15) theta = std::min(theta, lambda(i) / (lambda(i) - mu(i)));
      }
      lambda = lambda + theta * (mu - lambda);
      std::vector<Index> keep_idx;
      std::vector<double> keep_w;
      for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > 1e-15) {
          keep_idx.push_back(active[static_cast<std::size_t>(i)]);
          keep_w.push_back(lambda(i));
        }
      }
      if (keep_idx.empty()) {
        keep_idx.push_back(j);
        keep_w.push_back(1.0);
      }
      active = keep_idx;
      lambda = Eigen::Map<VectorXd>(keep_w.data(), static_cast<Index>(keep_w.size()));
      lambda /= lambda.sum();
    }
    x.setZero();
    for (std::size_t i = 0; i < active.size(); ++i) x += lambda(static_cast<Index>(i)) * q.col(active[i]);
  }

  MinNormResult res;
  res.weights = VectorXd::Zero(m);
  for (std::size_t i = 0; i < active.size(); ++i) res.weights(active[i]) = lambda(static_cast<Index>(i));
  res.point = points * res.weights;
  res.distance = (res.point - target).norm();
  res.iterations = iters;
  return res;
}

// ---------------------------------------------------------------- HypothesisSet

HypothesisSet HypothesisSet::l1_ball(Index p, double radius) {
  if (p < 1) throw ConfigError("set dimension must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("l1 ball radius must be positive");
  HypothesisSet s;
  s.kind_ = SetKind::l1_ball;
  s.p_ = p;
  s.radius_ = radius;
  return s;
}

HypothesisSet HypothesisSet::l2_ball(Index p, double radius, VectorXd center) {
  if (p < 1) throw ConfigError("set dimension must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("l2 ball radius must be positive");
  if (center.size() == 0) center = VectorXd::Zero(p);
  if (center.size() != p) throw DimensionError("l2 ball center has wrong dimension");
  HypothesisSet s;
  s.kind_ = SetKind::l2_ball;
  s.p_ = p;
  s.radius_ = radius;
  s.center_ = std::move(center);
  return s;
}

HypothesisSet HypothesisSet::hypercube(Index p, double halfwidth) {
  if (p < 1) throw ConfigError("set dimension must be >= 1");
  if (!(halfwidth > 0.0)) throw ConfigError("hypercube halfwidth must be positive");
  HypothesisSet s;
  s.kind_ = SetKind::hypercube;
  s.p_ = p;
  s.radius_ = halfwidth;
  return s;
}

HypothesisSet HypothesisSet::polytope(const MatrixXd& vertices) {
  if (vertices.cols() < 1 || vertices.rows() < 1) throw ConfigError("polytope needs at least one vertex");
  if (!vertices.allFinite()) throw ConfigError("polytope vertices must be finite");
  HypothesisSet s;
  s.kind_ = SetKind::polytope;
  s.p_ = vertices.rows();
  s.vertices_ = vertices;
  return s;
}

HypothesisSet HypothesisSet::polytope(const std::vector<VectorXd>& vertices) {
  if (vertices.empty()) throw ConfigError("polytope needs at least one vertex");
  MatrixXd v(vertices.front().size(), static_cast<Index>(vertices.size()));
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    if (vertices[j].size() != v.rows()) throw DimensionError("polytope vertices differ in dimension");
    v.col(static_cast<Index>(j)) = vertices[j];
  }
  return polytope(v);
}

HypothesisSet HypothesisSet::lifted_psd_fro(Index p, double radius) {
  if (p < 1) throw ConfigError("set dimension must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("Frobenius radius must be positive");
  HypothesisSet s;
  s.kind_ = SetKind::lifted_psd_fro;
  s.p_ = p;
  s.radius_ = radius;
  return s;
}

Index HypothesisSet::ambient() const { return kind_ == SetKind::lifted_psd_fro ? p_ * p_ : p_; }

bool HypothesisSet::polytopal() const {
  return kind_ == SetKind::l1_ball || kind_ == SetKind::polytope ||
         (kind_ == SetKind::hypercube && p_ <= 12);
}

std::string HypothesisSet::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(p=" << p_;
  switch (kind_) {
    case SetKind::l1_ball:
    case SetKind::lifted_psd_fro: os << ", radius=" << radius_; break;
    case SetKind::l2_ball: os << ", radius=" << radius_ << ", |center|=" << center_.norm(); break;
    case SetKind::hypercube: os << ", halfwidth=" << radius_; break;
    case SetKind::polytope: os << ", vertices=" << vertices_.cols(); break;
  }
  os << ")";
  return os.str();
}

VectorXd HypothesisSet::project(const VectorXd& v) const {
  if (v.size() != ambient()) throw DimensionError("projection input has wrong dimension");
  switch (kind_) {
    case SetKind::l1_ball: return project_l1_ball(v, radius_);
    case SetKind::l2_ball: return project_l2_ball(v, radius_, center_);
    case SetKind::hypercube: return project_hypercube(v, radius_);
    case SetKind::polytope: return nearest_in_hull(vertices_, v, 1e-15).point;
    case SetKind::lifted_psd_fro: {
      MatrixXd x = Eigen::Map<const MatrixXd>(v.data(), p_, p_);
      for (int it = 0; it < 1000; ++it) {
        MatrixXd y = project_psd(x);
        const double f = y.norm();
        if (f > radius_) y *= radius_ / f;
        const double moved = (y - x).norm();
        x = std::move(y);
        if (moved <= 1e-10 && it > 0) break;
      }
      return Eigen::Map<const VectorXd>(x.data(), p_ * p_);
    }
  }
  return v;
}

double HypothesisSet::support(const VectorXd& z) const {
  if (z.size() != ambient()) throw DimensionError("support function input has wrong dimension");
  switch (kind_) {
    case SetKind::l1_ball: return radius_ * z.cwiseAbs().maxCoeff();
    case SetKind::l2_ball: return radius_ * z.norm() + z.dot(center_);
    case SetKind::hypercube: return radius_ * z.lpNorm<1>();
    case SetKind::polytope: return (vertices_.transpose() * z).maxCoeff();
    case SetKind::lifted_psd_fro: {
      const Eigen::Map<const MatrixXd> m(z.data(), p_, p_);
      const MatrixXd sym = 0.5 * (m + m.transpose());
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
      return radius_ * eig.eigenvalues().cwiseMax(0.0).norm();
    }
  }
  return 0.0;
}

bool HypothesisSet::contains(const VectorXd& v, double tol) const {
  if (v.size() != ambient()) throw DimensionError("membership input has wrong dimension");
  if (!v.allFinite()) return false;
  if (kind_ == SetKind::lifted_psd_fro) {
    const Eigen::Map<const MatrixXd> m(v.data(), p_, p_);
    if ((m - m.transpose()).norm() > tol) return false;
    if (m.norm() > radius_ + tol) return false;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -tol;
  }
  return (v - project(v)).norm() <= tol;
}

MatrixXd HypothesisSet::vertices() const {
  switch (kind_) {
    case SetKind::l1_ball: {
      MatrixXd v = MatrixXd::Zero(p_, 2 * p_);
      for (Index j = 0; j < p_; ++j) {
        v(j, 2 * j) = radius_;
        v(j, 2 * j + 1) = -radius_;
      }
      return v;
    }
    case SetKind::hypercube: {
      if (p_ > 12) throw ConfigError("hypercube vertex enumeration limited to p <= 12");
      const Index count = Index{1} << p_;
      MatrixXd v(p_, count);
      for (Index c = 0; c < count; ++c) {
        for (Index j = 0; j < p_; ++j) v(j, c) = ((c >> j) & 1) ? radius_ : -radius_;
      }
      return v;
    }
    case SetKind::polytope: return vertices_;
    default: return MatrixXd(ambient(), 0);
  }
}

VectorXd HypothesisSet::sample_point(Rng& rng) const {
  switch (kind_) {
    case SetKind::l1_ball: {
      VectorXd e(p_);
      double total = 0.0;
      for (Index j = 0; j < p_; ++j) {
        e(j) = standard_exponential(rng) * random_sign(rng);
        total += std::abs(e(j));
      }
      total += standard_exponential(rng);
      return (radius_ / total) * e;
    }
    case SetKind::l2_ball: {
      VectorXd g(p_);
      for (Index j = 0; j < p_; ++j) g(j) = standard_normal(rng);
      const double r = radius_ * std::pow(uniform01(rng), 1.0 / static_cast<double>(p_));
      return center_ + (r / g.norm()) * g;
    }
    case SetKind::hypercube: {
      VectorXd u(p_);
      for (Index j = 0; j < p_; ++j) u(j) = radius_ * (2.0 * uniform01(rng) - 1.0);
      return u;
    }
    case SetKind::polytope: {
      VectorXd w(vertices_.cols());
      for (Index j = 0; j < w.size(); ++j) w(j) = standard_exponential(rng);
      return vertices_ * (w / w.sum());
    }
    case SetKind::lifted_psd_fro: {
      MatrixXd g(p_, p_);
      for (Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
      MatrixXd b = g * g.transpose();
      b *= radius_ * uniform01(rng) / b.norm();
      return Eigen::Map<const VectorXd>(b.data(), p_ * p_);
    }
  }
  return VectorXd::Zero(ambient());
}

double HypothesisSet::diameter_l2() const {
  switch (kind_) {
    case SetKind::l1_ball:
    case SetKind::l2_ball: return 2.0 * radius_;
    case SetKind::hypercube: return 2.0 * radius_ * std::sqrt(static_cast<double>(p_));
    case SetKind::lifted_psd_fro: return p_ == 1 ? radius_ : std::sqrt(2.0) * radius_;
    case SetKind::polytope: {
      double best = 0.0;
      for (Index i = 0; i < vertices_.cols(); ++i) {
        for (Index j = i + 1; j < vertices_.cols(); ++j) {
          best = std::max(best, (vertices_.col(i) - vertices_.col(j)).norm());
        }
      }
      return best;
    }
  }
  return 0.0;
}

MatrixXd HypothesisSet::difference_span_basis(double rel_tol) const {
  if (kind_ == SetKind::polytope) {
    if (vertices_.cols() < 2) return MatrixXd(p_, 0);
    const MatrixXd d = vertices_.rightCols(vertices_.cols() - 1).colwise() - vertices_.col(0);
    Eigen::JacobiSVD<MatrixXd> svd(d, Eigen::ComputeThinU);
    const VectorXd& sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
    return svd.matrixU().leftCols(rank);
  }
  if (kind_ == SetKind::lifted_psd_fro) {
    MatrixXd basis = MatrixXd::Zero(p_ * p_, p_ * (p_ + 1) / 2);
    Index c = 0;
    for (Index j = 0; j < p_; ++j) {
      for (Index i = 0; i <= j; ++i, ++c) {
        if (i == j) {
          basis(i + j * p_, c) = 1.0;
        } else {
          basis(i + j * p_, c) = std::sqrt(0.5);
          basis(j + i * p_, c) = std::sqrt(0.5);
        }
      }
    }
    return basis;
  }
  return MatrixXd::Identity(p_, p_);
}

// ---------------------------------------------------------------- direction samplers

namespace {

VectorXd random_direction(const HypothesisSet& set, Rng& rng) {
  const Index n = set.ambient();
  VectorXd g(n);
  for (Index i = 0; i < n; ++i) g(i) = standard_normal(rng);
  if (set.kind() == SetKind::lifted_psd_fro) {
    const Index p = set.base_dimension();
    Eigen::Map<MatrixXd> m(g.data(), p, p);
    const MatrixXd sym = 0.5 * (m + m.transpose());
    m = sym;
  }
  return g / g.norm();
}

void push_unit(std::vector<VectorXd>& out, const VectorXd& d, double floor) {
  const double n = d.norm();
  if (n > floor) out.push_back(d / n);
}

}  // namespace

std::vector<VectorXd> dedup_directions(const std::vector<VectorXd>& dirs, double tol) {
  std::vector<VectorXd> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) {
    bool dup = false;
    for (const auto& e : out) {
      if ((d - e).norm() < tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(d);
  }
  return out;
}

DirectionSample sphere_slice_directions(const HypothesisSet& set, const VectorXd& center, double t,
                                        std::size_t n_dirs, std::uint64_t seed) {
  if (center.size() != set.ambient()) throw DimensionError("slice center has wrong dimension");
  if (!(t > 0.0)) throw ConfigError("slice scale t must be positive");
  if (!set.contains(center, 1e-9)) throw ConfigError("slice center lies outside the set");

  Rng rng(derive_seed(seed, "sphere_slice"));
  std::vector<VectorXd> candidates;
  candidates.reserve(2 * n_dirs);
  for (std::size_t i = 0; i < n_dirs; ++i) candidates.push_back(random_direction(set, rng));
  // Projected probes reach thin slices that uniform rejection almost never hits.
  for (std::size_t i = 0; i < n_dirs; ++i) {
    const VectorXd w = set.project(center + t * random_direction(set, rng));
    push_unit(candidates, w - center, 1e-12 * t);
  }
  if (set.polytopal()) {
    const MatrixXd v = set.vertices();
    for (Index j = 0; j < v.cols(); ++j) push_unit(candidates, v.col(j) - center, 1e-12);
  }

  DirectionSample out;
  out.candidates = candidates.size();
  std::vector<VectorXd> accepted;
  for (const auto& d : candidates) {
    if (set.contains(center + t * d, 1e-12)) accepted.push_back(d);
  }
  out.accepted = accepted.size();
  out.acceptance_rate =
      out.candidates == 0 ? 0.0 : static_cast<double>(out.accepted) / static_cast<double>(out.candidates);
  out.directions = dedup_directions(accepted);
  return out;
}

ConeDirections cone_directions(const HypothesisSet& set, const VectorXd& apex, std::size_t n_dirs,
                               std::uint64_t seed) {
  if (apex.size() != set.ambient()) throw DimensionError("cone apex has wrong dimension");
  if (!set.contains(apex, 1e-9)) throw ConfigError("cone apex lies outside the set");
  ConeDirections out;
  const double diam = set.diameter_l2();
  if (diam <= 1e-12) {
    out.degenerate = true;
    return out;
  }
  Rng rng(derive_seed(seed, "cone_directions"));
  const double floor = 1e-9 * diam;
  std::vector<VectorXd> raw;
  if (set.polytopal()) {
    const MatrixXd v = set.vertices();
    for (Index j = 0; j < v.cols(); ++j) push_unit(raw, v.col(j) - apex, floor);
  }
  const double steps[] = {1e-3, 1e-2, 1e-1, 1.0};
  for (std::size_t i = 0; i < n_dirs; ++i) {
    if (i % 2 == 0) {
      push_unit(raw, set.sample_point(rng) - apex, floor);
    } else {
      const double s = steps[(i / 2) % 4] * diam;
      push_unit(raw, set.project(apex + s * random_direction(set, rng)) - apex, floor * 1e-3);
    }
  }
  out.directions = dedup_directions(raw);
  out.degenerate = out.directions.empty();
  return out;
}

// ---------------------------------------------------------------- skeletons

double Skeleton::diameter(const SemiNorm& norm) const {
  double best = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = i + 1; j < points.rows(); ++j) {
      best = std::max(best, norm(VectorXd(points.row(i) - points.row(j))));
    }
  }
  return best;
}

void Skeleton::refresh_diameters() {
  diameter_l2 = 0.0;
  diameter_inf = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = i + 1; j < points.rows(); ++j) {
      double sq = 0.0;
      double mx = 0.0;
      for (Index c = 0; c < points.cols(); ++c) {
        const double d = points(i, c) - points(j, c);
        sq += d * d;
        mx = std::max(mx, std::abs(d));
      }
      diameter_l2 = std::max(diameter_l2, sq);
      diameter_inf = std::max(diameter_inf, mx);
    }
  }
  diameter_l2 = std::sqrt(diameter_l2);
}

Skeleton Skeleton::scaled(double c) const {
  Skeleton s = *this;
  s.points *= c;
  s.diameter_l2 *= std::abs(c);
  s.diameter_inf *= std::abs(c);
  return s;
}

Skeleton Skeleton::from_points(const std::vector<VectorXd>& pts, std::string covered) {
  if (pts.empty()) throw ConfigError("skeleton needs at least one point");
  Skeleton s;
  s.points.resize(static_cast<Index>(pts.size()), pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != s.points.cols()) throw DimensionError("skeleton points differ in dimension");
    s.points.row(static_cast<Index>(i)) = pts[i].transpose();
  }
  s.covered_set = std::move(covered);
  s.refresh_diameters();
  return s;
}

Skeleton sparse_skeleton_sampler(Index k, Index p, std::size_t n_points, std::uint64_t seed) {
  if (k < 1 || p < 1) throw ConfigError("sparse skeleton needs k, p >= 1");
  if (k > p) throw ConfigError("sparse skeleton needs k <= p");
  if (n_points < 1) throw ConfigError("sparse skeleton needs at least one point");
  Rng rng(derive_seed(seed, "sparse_skeleton"));
  Skeleton s;
  s.points = MatrixXd::Zero(static_cast<Index>(n_points), p);
  std::vector<Index> idx(static_cast<std::size_t>(p));
  // Points come in antipodal pairs.
  for (std::size_t i = 0; i < n_points; i += 2) {
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index j = 0; j < k; ++j) {
      const Index r = j + static_cast<Index>(rng() % static_cast<std::uint64_t>(p - j));
      std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(r)]);
    }
    VectorXd g(k);
    for (Index j = 0; j < k; ++j) g(j) = standard_normal(rng);
    g *= 3.0 / g.norm();
    for (Index j = 0; j < k; ++j) {
      const Index col = idx[static_cast<std::size_t>(j)];
      s.points(static_cast<Index>(i), col) = g(j);
      if (i + 1 < n_points) s.points(static_cast<Index>(i + 1), col) = -g(j);
    }
  }
  s.covered_set = "descent cone of the l1 ball at a " + std::to_string(k) +
                  "-sparse point, intersected with the unit sphere";
  s.refresh_diameters();
  return s;
}

}  // namespace subexp
