#ifndef LIFTBV_TRIANGULATION_HPP
#define LIFTBV_TRIANGULATION_HPP

#include "liftbv/core.hpp"
#include "liftbv/polytope.hpp"

#include <array>
#include <vector>

namespace liftbv {

using Simplex = std::array<int, 4>;  // first d+1 entries used

/// Kuhn (Freudenthal) subdivision of a box grid: every cell splits into d!
/// simplices along the main diagonal, so neighbouring cells conform.
class Triangulation {
 public:
  Triangulation(Vec lo, Vec hi, std::vector<int> resolution);

  int dim() const { return static_cast<int>(res_.size()); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const std::vector<int>& resolution() const { return res_; }
  Vec spacing() const;

  std::size_t num_vertices() const { return static_cast<std::size_t>(coords_.cols()); }
  const Mat& coords() const { return coords_; }  // dim x num_vertices
  Vec vertex(int v) const { return coords_.col(v); }
  int vertex_index(const std::vector<int>& grid) const;

  const std::vector<Simplex>& simplices() const { return simplices_; }
  std::size_t num_simplices() const { return simplices_.size(); }

  /// Simplex containing x (clamped into the box) with barycentric weights.
  int locate(const Eigen::Ref<const Vec>& x, Vec* bary = nullptr) const;

  double simplex_volume(int s) const;
  /// Rows are affine functionals: bary(x) = B * x + c.
  void barycentric_map(int s, Mat& B, Vec& c) const;
  HPolytope simplex_polytope(int s) const;
  double box_volume() const;

 private:
  Vec lo_, hi_;
  std::vector<int> res_;
  Mat coords_;
  std::vector<Simplex> simplices_;
  std::vector<std::vector<int>> perms_;
};

Triangulation kuhn_triangulate(const Vec& lo, const Vec& hi, const std::vector<int>& resolution);

/// Continuous map, affine on every simplex of a Kuhn triangulation.
class PiecewiseAffineMap {
 public:
  PiecewiseAffineMap(Triangulation tri, Mat values);

  const Triangulation& triangulation() const { return tri_; }
  int domain_dim() const { return tri_.dim(); }
  int target_dim() const { return static_cast<int>(values_.rows()); }
  const Mat& values() const { return values_; }  // target_dim x num_vertices

  Vec eval(const Eigen::Ref<const Vec>& x) const;
  /// Affine restriction to simplex s: u(x) = J x + offset.
  void affine_piece(int s, Mat& J, Vec& offset) const;
  Mat gradient(int s) const;

  /// sum over simplices of |J|_F * vol.
  double total_variation() const;

 private:
  Triangulation tri_;
  Mat values_;
  std::vector<Mat> jac_;
  std::vector<Vec> off_;
};

/// Order-2 barycentric quadrature on a d-simplex (d in 1..3).
struct QuadratureRule {
  std::vector<Vec> bary;
  std::vector<double> weight;  // sum to 1
};
const QuadratureRule& simplex_rule(int d);

}  // namespace liftbv

#endif  // LIFTBV_TRIANGULATION_HPP
