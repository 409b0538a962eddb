#include "doctest.h"

#include "liftbv/polytope.hpp"
#include "liftbv/triangulation.hpp"

#include <Eigen/QR>

#include <map>
#include <random>

using namespace liftbv;

namespace {

Vec v2(double a, double b) { return Vec2(a, b); }

HPolytope unit_simplex2() {
  Mat A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  return HPolytope(A, Vec3(0, 0, 1));
}

Mat random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> G;
  Mat X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = G(rng);
  Eigen::HouseholderQR<Mat> qr(X);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("kuhn triangulation counts") {
  CHECK(kuhn_triangulate(Vec::Zero(2), Vec::Ones(2), {1, 1}).num_simplices() == 2);
  CHECK(kuhn_triangulate(Vec::Zero(3), Vec::Ones(3), {1, 1, 1}).num_simplices() == 6);
  CHECK_THROWS_AS(kuhn_triangulate(Vec::Zero(2), Vec::Ones(2), {0, 1}), Error);
  try {
    kuhn_triangulate(Vec::Zero(2), Vec::Ones(2), {0, 1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("kuhn triangulation tiles the box and facets pair up") {
  for (const std::vector<int>& res : {std::vector<int>{64}, std::vector<int>{64, 64}, std::vector<int>{3, 5},
                                      std::vector<int>{4, 4, 4}, std::vector<int>{2, 3, 5}}) {
    const int d = static_cast<int>(res.size());
    const Triangulation T(Vec::Constant(d, -1.0), Vec::Constant(d, 1.5), res);
    double vol = 0.0;
    for (std::size_t s = 0; s < T.num_simplices(); ++s) vol += T.simplex_volume(static_cast<int>(s));
    CHECK(std::abs(vol - T.box_volume()) <= 1e-12 * T.box_volume());

    std::map<std::vector<int>, int> facets;
    for (const Simplex& S : T.simplices())
      for (int drop = 0; drop <= d; ++drop) {
        std::vector<int> f;
        for (int k = 0; k <= d; ++k)
          if (k != drop) f.push_back(S[static_cast<std::size_t>(k)]);
        std::sort(f.begin(), f.end());
        ++facets[f];
      }
    bool ok = true;
    for (const auto& [f, n] : facets) {
      bool boundary = false;
      for (int k = 0; k < d; ++k) {
        bool all_lo = true, all_hi = true;
        for (int v : f) {
          all_lo = all_lo && T.vertex(v)(k) == T.lo()(k);
          all_hi = all_hi && T.vertex(v)(k) == T.hi()(k);
        }
        boundary = boundary || all_lo || all_hi;
      }
      ok = ok && (boundary ? n == 1 : n == 2);
    }
    CHECK(ok);
  }
}

TEST_CASE("locate returns consistent barycentric weights") {
  const Triangulation T(Vec::Zero(3), Vec::Ones(3), {3, 2, 4});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x = Vec3(U(rng), U(rng), U(rng));
    Vec bary;
    const int s = T.locate(x, &bary);
    CHECK(bary.minCoeff() >= -1e-12);
    Vec rec = Vec::Zero(3);
    for (int k = 0; k < 4; ++k) rec += bary(k) * T.vertex(T.simplices()[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]);
    CHECK((rec - x).norm() < 1e-12);
  }
}

TEST_CASE("piecewise affine map reproduces affine data") {
  const Triangulation T(Vec::Zero(2), Vec::Ones(2), {4, 3});
  Mat vals(1, static_cast<Eigen::Index>(T.num_vertices()));
  for (Eigen::Index v = 0; v < vals.cols(); ++v) vals(0, v) = 3 * T.coords()(0, v) - 4 * T.coords()(1, v) + 1;
  const PiecewiseAffineMap u(T, vals);
  CHECK(u.eval(v2(0.3, 0.7))(0) == doctest::Approx(3 * 0.3 - 4 * 0.7 + 1));
  CHECK(u.total_variation() == doctest::Approx(5.0));
}

TEST_CASE("fm_project shadows") {
  const HPolytope sq = HPolytope::box(v2(-1, -1), v2(1, 1));
  const HPolytope s1 = fm_project(sq, 1);
  CHECK(s1.dim() == 1);
  auto vs = vertices(s1);
  REQUIRE(vs.size() == 2);
  std::sort(vs.begin(), vs.end(), [](const Vec& a, const Vec& b) { return a(0) < b(0); });
  CHECK(vs[0](0) == doctest::Approx(-1));
  CHECK(vs[1](0) == doctest::Approx(1));

  auto ts = vertices(fm_project(unit_simplex2(), 1));
  REQUIRE(ts.size() == 2);
  std::sort(ts.begin(), ts.end(), [](const Vec& a, const Vec& b) { return a(0) < b(0); });
  CHECK(ts[0](0) == doctest::Approx(0));
  CHECK(ts[1](0) == doctest::Approx(1));

  CHECK(fm_project(HPolytope::empty(3), 0).is_empty());
}

TEST_CASE("fm_project commutes with sampling") {
  std::mt19937_64 rng(11);
  // Random bounded 3-polytope: box cut by random halfspaces through a ball around 0.
  Mat A(10, 3);
  Vec b(10);
  std::normal_distribution<double> G;
  for (int i = 0; i < 10; ++i) {
    Vec3 n(G(rng), G(rng), G(rng));
    A.row(i) = n.normalized().transpose();
    b(i) = 0.5 + std::abs(G(rng));
  }
  const HPolytope P = HPolytope(A, b).intersect(HPolytope::box(Vec::Constant(3, -2), Vec::Constant(3, 2)));
  const HPolytope S = fm_project(P, 2);

  std::uniform_real_distribution<double> U(-2, 2);
  int inside = 0;
  bool ok = true;
  while (inside < 10000) {
    const Vec x = Vec3(U(rng), U(rng), U(rng));
    if (!P.contains(x)) continue;
    ++inside;
    ok = ok && S.contains(x.head(2));
  }
  CHECK(ok);

  // Each shadow vertex is attained: the fiber above it is nonempty.
  for (const Vec& v : vertices(S)) {
    Mat E(2, 3);
    E << 1, 0, 0, 0, 1, 0;
    const HPolytope fiber(P.A(), P.b() + Vec::Constant(P.b().size(), 1e-9), E, v);
    CHECK_FALSE(fiber.is_empty());
  }
}

TEST_CASE("haus_measure basics") {
  CHECK(haus_measure(HPolytope::segment(v2(0, 0), v2(3, 4)), 1) == doctest::Approx(5.0));
  CHECK(haus_measure(unit_simplex2(), 2) == doctest::Approx(0.5));
  CHECK(haus_measure(HPolytope::point(v2(0.2, 0.7)), 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(haus_measure(unit_simplex2(), 1), Error);
}

TEST_CASE("haus_measure is rotation invariant and additive") {
  std::mt19937_64 rng(3);
  // Triangle embedded in R^3 and a square face of a cube.
  Mat A(3, 3);
  A << -1, 0, 0, 0, -1, 0, 1, 1, 0;
  Mat E(1, 3);
  E << 0, 0, 1;
  const HPolytope tri(A, Vec3(0, 0, 1), E, Vec::Constant(1, 0.3));
  const double base = haus_measure(tri, 2);
  CHECK(base == doctest::Approx(0.5));
  for (int trial = 0; trial < 10; ++trial) {
    const Mat R = random_rotation(3, rng);
    const HPolytope rot(tri.A() * R.transpose(), tri.b(), tri.E() * R.transpose(), tri.f());
    CHECK(std::abs(haus_measure(rot, 2) - base) <= 1e-9 * base);
  }
  // Square [0,1]^2 = two triangles split along the diagonal.
  const HPolytope sq = HPolytope::box(v2(0, 0), v2(1, 1));
  Mat Bl(1, 2), Bu(1, 2);
  Bl << 1, -1;
  Bu << -1, 1;
  const double lower = haus_measure(sq.intersect(HPolytope(Bl, Vec::Zero(1))), 2);
  const double upper = haus_measure(sq.intersect(HPolytope(Bu, Vec::Zero(1))), 2);
  CHECK(lower + upper == doctest::Approx(haus_measure(sq, 2)));

  const HPolytope cube = HPolytope::box(Vec::Zero(3), Vec::Ones(3));
  CHECK(haus_measure(cube, 3) == doctest::Approx(1.0));
}

TEST_CASE("PolyChain rejects mixed ambient dimension") {
  PolyChain c(2, 0);
  c.add(HPolytope::point(v2(0, 0)));
  CHECK_THROWS_AS(c.add(HPolytope::point(Vec3(0, 0, 0))), Error);
}

TEST_CASE("zero normal is rejected") {
  Mat A = Mat::Zero(1, 2);
  CHECK_THROWS_AS(HPolytope(A, Vec::Ones(1)), Error);
}
