#ifndef LIFTBV_POLYTOPE_HPP
#define LIFTBV_POLYTOPE_HPP

#include "liftbv/core.hpp"

#include <vector>

namespace liftbv {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double value = 0.0;
  Vec x;
};

/// Maximizes c.x subject to A x <= b and E x = f with x free.
/// Dense two-phase simplex with Bland's rule; meant for the handful of
/// variables that appear in desk-scale polyhedral geometry.
LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b, const Mat& E, const Vec& f);

/// Convex polyhedron {x : A x <= b, E x = f}. Rows are stored with unit
/// normals. Emptiness is decided once at construction.
class HPolytope {
 public:
  explicit HPolytope(int dim);
  HPolytope(Mat A, Vec b);
  HPolytope(Mat A, Vec b, Mat E, Vec f);

  static HPolytope box(const Vec& lo, const Vec& hi);
  static HPolytope empty(int dim);
  static HPolytope point(const Vec& p);
  static HPolytope segment(const Vec& p, const Vec& q);

  int dim() const { return dim_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const Mat& E() const { return E_; }
  const Vec& f() const { return f_; }
  Eigen::Index num_inequalities() const { return A_.rows(); }
  Eigen::Index num_equalities() const { return E_.rows(); }

  bool is_empty() const { return empty_; }
  bool contains(const Eigen::Ref<const Vec>& x, double tol = kGeoEps) const;
  HPolytope intersect(const HPolytope& other) const;

 private:
  int dim_;
  Mat A_;
  Vec b_;
  Mat E_;
  Vec f_;
  bool empty_ = false;
};

/// Shadow of P under deletion of coordinate `axis`.
HPolytope fm_project(const HPolytope& P, int axis);

/// Vertices of a bounded polytope; duplicates within tolerance are merged.
std::vector<Vec> vertices(const HPolytope& P);

/// Affine dimension of a point set (-1 for the empty set).
int affine_dim(const std::vector<Vec>& pts, double tol = 1e-9);
int affine_dim(const HPolytope& P);

/// j-dimensional Hausdorff measure of a polytope of intrinsic dimension j.
double haus_measure(const HPolytope& P, int j);

/// Hausdorff measure of the convex hull of points spanning exactly j dimensions.
double hull_measure(const std::vector<Vec>& pts, int j);

struct PolyMember {
  HPolytope poly;
  int tag = 0;
};

/// Members sharing ambient and intrinsic dimension.
class PolyChain {
 public:
  PolyChain(int ambient_dim, int intrinsic_dim) : ambient_(ambient_dim), intrinsic_(intrinsic_dim) {}

  void add(HPolytope poly, int tag = 0);
  int ambient_dim() const { return ambient_; }
  int intrinsic_dim() const { return intrinsic_; }
  const std::vector<PolyMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  int ambient_;
  int intrinsic_;
  std::vector<PolyMember> members_;
};

}  // namespace liftbv

#endif  // LIFTBV_POLYTOPE_HPP
