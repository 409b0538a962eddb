#include "liftbv/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace liftbv {

Triangulation::Triangulation(Vec lo, Vec hi, std::vector<int> resolution)
    : lo_(std::move(lo)), hi_(std::move(hi)), res_(std::move(resolution)) {
  const int d = static_cast<int>(res_.size());
  if (d < 1 || d > 3) fail(ErrorKind::InvalidArgument, "kuhn_triangulate: dimension must be 1, 2 or 3");
  if (lo_.size() != d || hi_.size() != d) fail(ErrorKind::InvalidArgument, "kuhn_triangulate: box/resolution mismatch");
  for (int k = 0; k < d; ++k) {
    if (res_[static_cast<std::size_t>(k)] < 1)
      fail(ErrorKind::InvalidArgument, "kuhn_triangulate: resolution must be >= 1");
    if (!(hi_(k) > lo_(k))) fail(ErrorKind::InvalidArgument, "kuhn_triangulate: empty box");
  }

  std::vector<int> stride(static_cast<std::size_t>(d), 1);
  std::size_t nverts = 1;
  for (int k = 0; k < d; ++k) {
    stride[static_cast<std::size_t>(k)] = static_cast<int>(nverts);
    nverts *= static_cast<std::size_t>(res_[static_cast<std::size_t>(k)] + 1);
  }
  const Vec h = spacing();
  coords_.resize(d, static_cast<Eigen::Index>(nverts));
  for (std::size_t v = 0; v < nverts; ++v) {
    std::size_t rem = v;
    for (int k = 0; k < d; ++k) {
      const auto n = static_cast<std::size_t>(res_[static_cast<std::size_t>(k)] + 1);
      const auto g = static_cast<double>(rem % n);
      rem /= n;
      // Last grid line snaps exactly onto hi.
      coords_(k, static_cast<Eigen::Index>(v)) =
          (g == static_cast<double>(n - 1)) ? hi_(k) : lo_(k) + g * h(k);
    }
  }

  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  do perms_.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  std::size_t ncells = 1;
  for (int k = 0; k < d; ++k) ncells *= static_cast<std::size_t>(res_[static_cast<std::size_t>(k)]);
  simplices_.reserve(ncells * perms_.size());
  for (std::size_t c = 0; c < ncells; ++c) {
    std::size_t rem = c;
    int base = 0;
    for (int k = 0; k < d; ++k) {
      const auto n = static_cast<std::size_t>(res_[static_cast<std::size_t>(k)]);
      base += static_cast<int>(rem % n) * stride[static_cast<std::size_t>(k)];
      rem /= n;
    }
    for (const auto& perm : perms_) {
      Simplex s{-1, -1, -1, -1};
      s[0] = base;
      for (int k = 0; k < d; ++k) s[static_cast<std::size_t>(k + 1)] = s[static_cast<std::size_t>(k)] + stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      simplices_.push_back(s);
    }
  }
}

Vec Triangulation::spacing() const {
  Vec h(dim());
  for (int k = 0; k < dim(); ++k) h(k) = (hi_(k) - lo_(k)) / res_[static_cast<std::size_t>(k)];
  return h;
}

int Triangulation::vertex_index(const std::vector<int>& grid) const {
  int idx = 0;
  int stride = 1;
  for (int k = 0; k < dim(); ++k) {
    idx += grid[static_cast<std::size_t>(k)] * stride;
    stride *= res_[static_cast<std::size_t>(k)] + 1;
  }
  return idx;
}

int Triangulation::locate(const Eigen::Ref<const Vec>& x, Vec* bary) const {
  const int d = dim();
  const Vec h = spacing();
  std::vector<double> frac(static_cast<std::size_t>(d));
  std::size_t cell = 0;
  std::size_t stride = 1;
  for (int k = 0; k < d; ++k) {
    const int n = res_[static_cast<std::size_t>(k)];
    const double s = (x(k) - lo_(k)) / h(k);
    const int c = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
    frac[static_cast<std::size_t>(k)] = std::clamp(s - c, 0.0, 1.0);
    cell += static_cast<std::size_t>(c) * stride;
    stride *= static_cast<std::size_t>(n);
  }
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
  });
  const auto pi = static_cast<std::size_t>(std::find(perms_.begin(), perms_.end(), order) - perms_.begin());
  if (bary) {
    bary->resize(d + 1);
    (*bary)(0) = 1.0 - frac[static_cast<std::size_t>(order[0])];
    for (int k = 1; k < d; ++k)
      (*bary)(k) = frac[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])] -
                   frac[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    (*bary)(d) = frac[static_cast<std::size_t>(order[static_cast<std::size_t>(d - 1)])];
  }
  return static_cast<int>(cell * perms_.size() + pi);
}

double Triangulation::simplex_volume(int s) const {
  const int d = dim();
  const Simplex& S = simplices_[static_cast<std::size_t>(s)];
  Mat T(d, d);
  for (int k = 0; k < d; ++k) T.col(k) = coords_.col(S[static_cast<std::size_t>(k + 1)]) - coords_.col(S[0]);
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  return std::abs(T.determinant()) / fact;
}

void Triangulation::barycentric_map(int s, Mat& B, Vec& c) const {
  const int d = dim();
  const Simplex& S = simplices_[static_cast<std::size_t>(s)];
  Mat T(d, d);
  const Vec v0 = coords_.col(S[0]);
  for (int k = 0; k < d; ++k) T.col(k) = coords_.col(S[static_cast<std::size_t>(k + 1)]) - v0;
  const Mat Tinv = T.inverse();
  B.resize(d + 1, d);
  c.resize(d + 1);
  B.bottomRows(d) = Tinv;
  c.tail(d) = -Tinv * v0;
  B.row(0) = -Tinv.colwise().sum();
  c(0) = 1.0 - c.tail(d).sum();
}

HPolytope Triangulation::simplex_polytope(int s) const {
  Mat B;
  Vec c;
  barycentric_map(s, B, c);
  return HPolytope(-B, c);
}

double Triangulation::box_volume() const { return (hi_ - lo_).prod(); }

Triangulation kuhn_triangulate(const Vec& lo, const Vec& hi, const std::vector<int>& resolution) {
  return Triangulation(lo, hi, resolution);
}

PiecewiseAffineMap::PiecewiseAffineMap(Triangulation tri, Mat values)
    : tri_(std::move(tri)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != tri_.num_vertices())
    fail(ErrorKind::InvalidArgument, "PiecewiseAffineMap: one value per vertex required");
  const int d = tri_.dim();
  jac_.resize(tri_.num_simplices());
  off_.resize(tri_.num_simplices());
  for (std::size_t s = 0; s < tri_.num_simplices(); ++s) {
    const Simplex& S = tri_.simplices()[s];
    Mat X(d, d), U(values_.rows(), d);
    for (int k = 0; k < d; ++k) {
      X.col(k) = tri_.vertex(S[static_cast<std::size_t>(k + 1)]) - tri_.vertex(S[0]);
      U.col(k) = values_.col(S[static_cast<std::size_t>(k + 1)]) - values_.col(S[0]);
    }
    jac_[s] = U * X.inverse();
    off_[s] = values_.col(S[0]) - jac_[s] * tri_.vertex(S[0]);
  }
}

Vec PiecewiseAffineMap::eval(const Eigen::Ref<const Vec>& x) const {
  Vec bary;
  const int s = tri_.locate(x, &bary);
  const Simplex& S = tri_.simplices()[static_cast<std::size_t>(s)];
  Vec out = Vec::Zero(values_.rows());
  for (int k = 0; k <= tri_.dim(); ++k) out += bary(k) * values_.col(S[static_cast<std::size_t>(k)]);
  return out;
}

void PiecewiseAffineMap::affine_piece(int s, Mat& J, Vec& offset) const {
  J = jac_[static_cast<std::size_t>(s)];
  offset = off_[static_cast<std::size_t>(s)];
}

Mat PiecewiseAffineMap::gradient(int s) const { return jac_[static_cast<std::size_t>(s)]; }

double PiecewiseAffineMap::total_variation() const {
  double tv = 0.0;
  for (std::size_t s = 0; s < tri_.num_simplices(); ++s) tv += jac_[s].norm() * tri_.simplex_volume(static_cast<int>(s));
  return tv;
}

const QuadratureRule& simplex_rule(int d) {
  static const QuadratureRule rules[3] = {
      [] {
        QuadratureRule r;
        const double g = 0.5 / std::sqrt(3.0);
        r.bary = {Vec2(0.5 + g, 0.5 - g), Vec2(0.5 - g, 0.5 + g)};
        r.weight = {0.5, 0.5};
        return r;
      }(),
      [] {
        QuadratureRule r;
        r.bary = {Vec3(2.0 / 3, 1.0 / 6, 1.0 / 6), Vec3(1.0 / 6, 2.0 / 3, 1.0 / 6), Vec3(1.0 / 6, 1.0 / 6, 2.0 / 3)};
        r.weight = {1.0 / 3, 1.0 / 3, 1.0 / 3};
        return r;
      }(),
      [] {
        QuadratureRule r;
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        r.bary = {Vec4(a, b, b, b), Vec4(b, a, b, b), Vec4(b, b, a, b), Vec4(b, b, b, a)};
        r.weight = {0.25, 0.25, 0.25, 0.25};
        return r;
      }(),
  };
  if (d < 1 || d > 3) fail(ErrorKind::InvalidArgument, "simplex_rule: d must be 1..3");
  return rules[d - 1];
}

}  // namespace liftbv
