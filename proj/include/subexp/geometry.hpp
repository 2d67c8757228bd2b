#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "subexp/distributions.hpp"
#include "subexp/rng.hpp"

namespace subexp {

enum class SetKind { l1_ball, l2_ball, hypercube, polytope, lifted_psd_fro };

std::string to_string(SetKind kind);
SetKind parse_set_kind(const std::string& name);

// Euclidean projections with closed forms.
VectorXd project_l1_ball(const VectorXd& v, double radius);
VectorXd project_l2_ball(const VectorXd& v, double radius, const VectorXd& center);
VectorXd project_hypercube(const VectorXd& v, double halfwidth);
// Nearest symmetric PSD matrix (eigenvalue clipping of the symmetric part).
MatrixXd project_psd(const MatrixXd& m);

struct MinNormResult {
  VectorXd point;    // nearest point of conv(columns) to the target
  VectorXd weights;  // convex weights over columns
  double distance = 0.0;
  int iterations = 0;
};

// Wolfe's active-set minimum-norm-point method on conv(points.col(j)) - target.
MinNormResult nearest_in_hull(const MatrixXd& points, const VectorXd& target, double tol = 1e-12);

class HypothesisSet {
 public:
  static HypothesisSet l1_ball(Index p, double radius);
  static HypothesisSet l2_ball(Index p, double radius, VectorXd center = {});
  static HypothesisSet hypercube(Index p, double halfwidth);
  // Vertices are the columns of a p x D matrix.
  static HypothesisSet polytope(const MatrixXd& vertices);
  static HypothesisSet polytope(const std::vector<VectorXd>& vertices);
  static HypothesisSet lifted_psd_fro(Index p, double radius);

  SetKind kind() const { return kind_; }
  Index ambient() const;  // vector length; p*p for lifted sets
  Index base_dimension() const { return p_; }
  double radius() const { return radius_; }
  const VectorXd& center() const { return center_; }
  const MatrixXd& vertex_matrix() const { return vertices_; }
  bool polytopal() const;
  bool bounded() const { return true; }
  std::string describe() const;

  VectorXd project(const VectorXd& v) const;
  double support(const VectorXd& z) const;
  bool contains(const VectorXd& v, double tol = 1e-10) const;
  // Vertices for polytopal kinds (l1 ball, hypercube when p <= 12, polytope); columns.
  MatrixXd vertices() const;
  // A random point of the set (not necessarily uniform for every kind).
  VectorXd sample_point(Rng& rng) const;
  double diameter_l2() const;
  // Orthonormal basis of span(K - K) as columns.
  MatrixXd difference_span_basis(double rel_tol = 1e-8) const;

 private:
  SetKind kind_ = SetKind::l2_ball;
  Index p_ = 0;
  double radius_ = 1.0;
  VectorXd center_;
  MatrixXd vertices_;
};

struct DirectionSample {
  std::vector<VectorXd> directions;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  bool empty() const { return directions.empty(); }
};

// Unit v with center + t v in the set.
DirectionSample sphere_slice_directions(const HypothesisSet& set, const VectorXd& center, double t,
                                        std::size_t n_dirs, std::uint64_t seed);

struct ConeDirections {
  std::vector<VectorXd> directions;
  bool degenerate = false;  // set == {apex}
};

ConeDirections cone_directions(const HypothesisSet& set, const VectorXd& apex, std::size_t n_dirs,
                               std::uint64_t seed);

// Drops vectors within `tol` (Euclidean, on unit vectors) of an earlier one.
std::vector<VectorXd> dedup_directions(const std::vector<VectorXd>& dirs, double tol = 1e-6);

struct Skeleton {
  MatrixXd points;  // one point per row
  std::string covered_set;
  double diameter_l2 = 0.0;
  double diameter_inf = 0.0;

  Index size() const { return points.rows(); }
  Index dimension() const { return points.cols(); }
  double diameter(const SemiNorm& norm) const;
  void refresh_diameters();
  Skeleton scaled(double c) const;
  static Skeleton from_points(const std::vector<VectorXd>& pts, std::string covered = "point list");
};

Skeleton sparse_skeleton_sampler(Index k, Index p, std::size_t n_points, std::uint64_t seed);

}  // namespace subexp
