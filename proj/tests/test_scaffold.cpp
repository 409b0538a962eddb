#include "doctest.h"

#include "liftbv/scaffold.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace liftbv;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

const Scaffold& circle_grid() {
  static const Scaffold s = build_generic_scaffold(make_target("circle"), 8, 2.0, 0.25);
  return s;
}

}  // namespace

TEST_CASE("generic circle scaffold has a point singular set") {
  const Scaffold& s = circle_grid();
  REQUIRE(s.X().has_value());
  CHECK(s.X()->intrinsic_dim() == 0);
  CHECK(!s.X()->empty());
  for (const auto& mem : s.X()->members()) CHECK(affine_dim(mem.poly) == 0);
  // X stays away from N.
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) CHECK(s.dist_to_X(s.target().sample_N(rng)) > 0.1);
}

TEST_CASE("generic torus scaffold members have dimension at most two") {
  const Scaffold s = build_generic_scaffold(make_target("clifford_torus"), 4, 1.0);
  REQUIRE(s.X().has_value());
  CHECK(s.X()->intrinsic_dim() == 2);
  const auto& mem = s.X()->members();
  REQUIRE(!mem.empty());
  for (std::size_t i = 0; i < mem.size(); i += std::max<std::size_t>(1, mem.size() / 150))
    CHECK(affine_dim(mem[i].poly) <= 2);
}

TEST_CASE("coarse grid fails construction") {
  CHECK(kind_of([] { build_generic_scaffold(make_target("circle"), 1, 2.0); }) == ErrorKind::ConstructionFailure);
  CHECK(kind_of([] { build_generic_scaffold(make_target("so3"), 4, 2.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("radial retraction") {
  const Vec lo = Vec2(-1, -1), hi = Vec2(1, 1);
  CHECK((radial_retract(lo, hi, Vec2(0.5, 0.25)) - Vec2(1.0, 0.5)).norm() < 1e-15);
  CHECK((radial_retract(lo, hi, Vec2(1, 0.3)) - Vec2(1, 0.3)).norm() < 1e-15);
  CHECK(kind_of([&] { radial_retract(lo, hi, Vec2(0, 0)); }) == ErrorKind::SingularPoint);
}

TEST_CASE("cascade retraction examples") {
  const Scaffold& s = circle_grid();
  const double h = s.cell_size();
  // A grid edge far from the circle: x = -2 + h, y in the first cell.
  const Vec on_edge = Vec2(-2 + h, -2 + 0.3 * h);
  CHECK((cascade_retract(s, 2, on_edge) - on_edge).norm() == 0.0);
  // Interior of a cube of W: (1, 0) lies on N, so its cube is in W.
  const Vec inside_w = Vec2(1.0 + 0.01, 0.013);
  CHECK((cascade_retract(s, 2, inside_w) - inside_w).norm() == 0.0);
  // The centre of a non-W cube is singular.
  const Vec centre = Vec2(-2 + 0.5 * h, -2 + 0.5 * h);
  CHECK(kind_of([&] { cascade_retract(s, 2, centre); }) == ErrorKind::SingularPoint);
}

TEST_CASE("cascade touches at most m faces") {
  const Scaffold s = build_generic_scaffold(make_target("clifford_torus"), 4, 1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  int worst = 0;
  for (int i = 0; i < 2000; ++i) {
    Vec z(4);
    for (int k = 0; k < 4; ++k) z(k) = U(rng);
    s.cascade(4, z);
    worst = std::max(worst, Scaffold::last_lookup_count());
  }
  CHECK(worst <= 4);
  CHECK(worst >= 2);
}

TEST_CASE("cascade is consistent across shared faces") {
  const Scaffold& s = circle_grid();
  const double h = s.cell_size();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  double worst = 0.0;
  for (int line = 1; line < s.cells_per_axis(); ++line)
    for (int cell = 0; cell < s.cells_per_axis(); ++cell) {
      const Vec z = Vec2(-2 + line * h, -2 + (cell + U(rng)) * h);
      const Vec left = s.rho(z - Vec2(1e-14, 0)), right = s.rho(z + Vec2(1e-14, 0));
      worst = std::max(worst, (left - right).norm());
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("eval_retraction examples and retraction property") {
  const Scaffold& s = circle_grid();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec z = s.target().sample_N(rng);
    worst = std::max(worst, (eval_retraction(s, Vec::Zero(2), z) - z).norm());
  }
  CHECK(worst <= 1e-9);

  const Scaffold a = build_analytic_scaffold(make_target("circle"), 3.0, 0.25);
  CHECK((eval_retraction(a, Vec::Zero(2), Vec2(2, 0)) - Vec2(1, 0)).norm() < 1e-15);
  const Vec y = Vec2(0.1, -0.05);
  CHECK(kind_of([&] { eval_retraction(a, y, y); }) == ErrorKind::NearSingular);
  CHECK(kind_of([&] { eval_retraction(a, Vec2(0.3, 0), Vec2(1, 1)); }) == ErrorKind::InvalidArgument);

  // Shifted retraction lands on N and fixes nothing in particular, but inverts the shift on N.
  for (int i = 0; i < 200; ++i) {
    const Vec z = Vec2(std::uniform_real_distribution<double>(-1.5, 1.5)(rng), 0.7);
    const Vec r = eval_retraction(s, y, z);
    CHECK(s.target().dist_to_N(r) <= 1e-9);
    CHECK((s.rho(r - y) - s.rho(z - y)).norm() <= 1e-9);
  }
}

TEST_CASE("shifted retraction on the torus and SO(3) targets") {
  std::mt19937_64 rng(12);
  for (const char* id : {"clifford_torus", "so3", "so3_mod_v4"}) {
    CAPTURE(id);
    const auto t = make_target(id);
    const Scaffold s = build_analytic_scaffold(t, 2.0, 0.2);
    Vec y = Vec::Random(t->m());
    y *= 0.15 / y.norm();
    for (int i = 0; i < 50; ++i) {
      const Vec z = t->sample_N(rng) + 0.05 * Vec::Random(t->m());
      const Vec r = eval_retraction(s, y, z);
      CHECK(t->dist_to_N(r) <= 1e-9);
      CHECK((s.rho(r - y) - s.rho(z - y)).norm() <= 1e-9);
    }
  }
}

TEST_CASE("audit of the analytic circle scaffold") {
  Scaffold a = build_analytic_scaffold(make_target("circle"), 2.0, 0.25);
  const AuditReport r = audit_scaffold(a, 1000, 17);
  CHECK(r.identity_residual <= 1e-12);
  CHECK(r.C1_estimate <= std::numbers::pi + 1e-3);
  CHECK(r.C0_stable);
  CHECK(r.C1_stable);
  CHECK(r.C0_estimate == doctest::Approx(1.0).epsilon(1e-4));

  // Oracle: dense sampling of z/|z| along the same kind of segments.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-2, 2);
  double dense = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec p = Vec2(U(rng), U(rng)), q = Vec2(U(rng), U(rng));
    double L = 0.0;
    Vec prev = p.normalized();
    for (int k = 1; k <= 20000; ++k) {
      const Vec cur = (p + (q - p) * (k / 20000.0)).normalized();
      L += (cur - prev).norm();
      prev = cur;
    }
    dense = std::max(dense, L);
  }
  CHECK(dense <= std::numbers::pi + 1e-3);

  certify(a, r);
  CHECK(a.C1() >= r.C1_refined);
}

TEST_CASE("audit of the generic circle scaffold") {
  Scaffold s = build_generic_scaffold(make_target("circle"), 8, 2.0);
  const AuditReport r = audit_scaffold(s, 500, 5);
  CHECK(r.identity_residual <= 1e-12);
  CHECK(std::isfinite(r.C0_estimate));
  CHECK(r.C0_stable);
  CHECK(r.C1_stable);
  certify(s, r);
  // Fresh samples never exceed the certified gradient and segment bounds.
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> U(-1.99, 1.99);
  for (int i = 0; i < 500; ++i) {
    const Vec z = Vec2(U(rng), U(rng));
    const double d = s.dist_to_X(z);
    if (d < 1e-4) continue;
    const double e = 1e-6;
    double g2 = 0.0;
    for (int k = 0; k < 2; ++k) {
      Vec zp = z, zm = z;
      zp(k) += e;
      zm(k) -= e;
      g2 += ((s.rho(zp) - s.rho(zm)) / (2 * e)).squaredNorm();
    }
    CHECK(std::sqrt(g2) * d <= s.C0());
    CHECK(segment_image_length(s, z, Vec2(U(rng), U(rng)), 1e-4) <= s.C1());
  }
}

TEST_CASE("scaffold files round-trip") {
  Scaffold s = build_generic_scaffold(make_target("circle"), 8, 2.0);
  s.set_constants(1.5, 4.0);
  std::stringstream ss;
  s.save(ss);
  const Scaffold t = Scaffold::load(ss);
  CHECK(t.kind() == ScaffoldKind::GenericGrid);
  CHECK(t.W() == s.W());
  CHECK(t.dual_pieces().size() == s.dual_pieces().size());
  CHECK(t.C0() == 1.5);
  CHECK(t.sigma() == s.sigma());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Vec z = Vec2(U(rng), U(rng));
    CHECK((t.rho(z) - s.rho(z)).norm() == 0.0);
  }

  std::stringstream bad("not a scaffold\n");
  CHECK(kind_of([&] { Scaffold::load(bad); }) == ErrorKind::IngestError);

  const Scaffold a = build_analytic_scaffold(make_target("so3"), 2.0, 0.2);
  std::stringstream sa;
  a.save(sa);
  const Scaffold b = Scaffold::load(sa);
  CHECK(b.kind() == ScaffoldKind::Analytic);
  CHECK(std::isnan(b.C0()));
}
