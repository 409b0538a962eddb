#include "doctest.h"

#include "liftbv/field.hpp"
#include "liftbv/lift.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

using namespace liftbv;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

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
  static const Scaffold s = [] {
    Scaffold g = build_generic_scaffold(make_target("circle"), 8, 2.0, 0.25);
    g.set_constants(3.46, 10.1);
    return g;
  }();
  return s;
}

PiecewiseAffineMap field_map(const std::string& kind, int res) {
  return interpolate_pa(synthetic_field(kind, res, 2.0)).map;
}

const PiecewiseAffineMap& vortex32() {
  static const PiecewiseAffineMap u = field_map("vortex", 32);
  return u;
}

const LiftedField& vortex_lift() {
  static const LiftedField lf = [] {
    LiftConfig cfg;
    cfg.normalize = false;
    return lift_pa_field(vortex32(), circle_grid(), cfg);
  }();
  return lf;
}

const std::vector<Vec>& square_loop() {
  static const std::vector<Vec> loop{Vec2(0.7, 0.7), Vec2(-0.7, 0.71), Vec2(-0.69, -0.7), Vec2(0.71, -0.69)};
  return loop;
}

}  // namespace

TEST_CASE("constant field lifts to a constant") {
  const PiecewiseAffineMap u = field_map("constant", 12);
  const LiftedField lf = lift_pa_field(u, circle_grid());
  CHECK(lf.facets.empty());
  CHECK(std::abs(lf.bv.total) < 1e-12);
  CHECK(lf.vertex_values.row(0).maxCoeff() - lf.vertex_values.row(0).minCoeff() < 1e-12);
  CHECK(std::abs(lf.vertex_values(0, 0) - std::atan2(0.8, 0.6)) < 1e-9);
  CHECK(lf.lift_residual < 1e-9);
}

TEST_CASE("cylinder lift starts from the anchor") {
  const PiecewiseAffineMap u = field_map("constant", 4);
  const CoverTarget& t = circle_grid().target();
  const Vec u_star = Vec2(0.6, 0.8);
  const Homotopy h{u, u_star};
  const Vec w = t.deck_apply(t.deck_parse("t^2"), t.any_lift(u_star));
  const Vec v = cylinder_lift(h, circle_grid(), Vec2(0.02, 0.01), Vec2(0.3, -0.4), w);
  CHECK((v - w).norm() < 1e-9);
  CHECK(kind_of([&] { cylinder_lift(h, circle_grid(), Vec2(0.02, 0.01), Vec2(0, 0), Vec::Constant(1, 0.0)); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("vortex: one jump curve of height 2 pi") {
  const LiftedField& lf = vortex_lift();
  REQUIRE(!lf.facets.empty());
  double len = 0.0;
  for (const auto& f : lf.facets) {
    CHECK((f.label_name == "t" || f.label_name == "t^-1"));
    CHECK(f.max_jump == doctest::Approx(kTwoPi).epsilon(1e-6));
    len += f.measure;
  }
  CHECK(lf.facets.front().label_name == lf.facets.back().label_name);
  CHECK(len > 0.5);
  CHECK(lf.bv.jump == doctest::Approx(kTwoPi * len).epsilon(1e-6));
  CHECK(lf.bv.total == doctest::Approx(lf.bv.ac + lf.bv.jump));
  CHECK(lf.bv.cantor == 0.0);
  CHECK(lf.max_jump() <= lf.constants.C_jump);
  CHECK(lf.bv.total <= lf.constants.C_tv * lf.tv_u);
  CHECK(lf.lift_residual < 1e-9);
  CHECK(lf.target->deck_name(loop_monodromy(lf, square_loop())) ==
        lf.target->deck_name(path_lift_monodromy(vortex32(), circle_grid(), lf.y, square_loop())));
  CHECK(sbv_check(lf, vortex32()).passed());
}

TEST_CASE("vortex: lifts on either side of a facet differ by one deck step") {
  const LiftedField& lf = vortex_lift();
  REQUIRE(!lf.facets.empty());
  const Homotopy h{vortex32(), lf.u_star};
  const JumpFacet& f = lf.facets[lf.facets.size() / 2];
  const Vec p = 0.5 * (f.vertices.front() + f.vertices.back());
  const Vec vp = cylinder_lift(h, circle_grid(), lf.y, p + 1e-4 * f.normal, lf.w_anchor);
  const Vec vm = cylinder_lift(h, circle_grid(), lf.y, p - 1e-4 * f.normal, lf.w_anchor);
  CHECK(std::abs(std::abs(vp(0) - vm(0)) - kTwoPi) < 1e-2);
  CHECK((lf.target->deck_apply(f.label, vm) - vp).norm() < 1e-2);
  CHECK(kind_of([&] { cylinder_lift(h, circle_grid(), lf.y, p, lf.w_anchor); }) == ErrorKind::NearJump);
}

TEST_CASE("vortex: lifts from different sheets agree after normalization") {
  const LiftedField& base = vortex_lift();
  LiftConfig cfg;
  cfg.normalize = false;
  cfg.anchor_deck = base.target->deck_parse("t^3");
  LiftedField moved = lift_pa_field(vortex32(), circle_grid(), cfg);
  CHECK((moved.vertex_values.array() - base.vertex_values.array() - 3 * kTwoPi).abs().maxCoeff() < 1e-9);
  CHECK(moved.facets.size() == base.facets.size());

  LiftedField a = base;
  normalize(a);
  normalize(moved);
  CHECK((a.vertex_values - moved.vertex_values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(moved.target->deck_name(moved.normalization) == "t^3");
}

TEST_CASE("halving the lift step does not move the lift") {
  const LiftedField& lf = vortex_lift();
  const Homotopy h{vortex32(), lf.u_star};
  PathOptions fine;
  fine.step_fraction = 0.25;
  for (const Vec& x : {Vec(Vec2(0.5, 0.3)), Vec(Vec2(-0.8, 0.1)), Vec(Vec2(0.05, -0.9))}) {
    const Vec a = cylinder_lift(h, circle_grid(), lf.y, x, lf.w_anchor);
    const Vec b = cylinder_lift(h, circle_grid(), lf.y, x, lf.w_anchor, fine);
    CHECK((a - b).norm() < 1e-8);
  }
}

TEST_CASE("smooth field: no jumps and the gradient integral") {
  const PiecewiseAffineMap u = field_map("smooth", 32);
  const LiftedField lf = lift_pa_field(u, circle_grid());
  CHECK(lf.facets.empty());
  CHECK(lf.bv.jump == 0.0);
  CHECK(lf.bv.ac == doctest::Approx(smooth_field_tv()).epsilon(0.02));
}

TEST_CASE("normalize moves values into the fundamental domain") {
  LiftedField lf;
  lf.target = make_target("circle");
  lf.vertex_values.resize(1, 11);
  for (int i = 0; i <= 10; ++i) lf.vertex_values(0, i) = 31.0 + 0.1 * i;
  lf.w_anchor = Vec::Constant(1, 31.2);
  normalize(lf);
  for (int i = 0; i <= 10; ++i) CHECK(lf.vertex_values(0, i) == doctest::Approx(31.0 + 0.1 * i - 5 * kTwoPi));
  CHECK(lf.target->deck_name(lf.normalization) == "t^5");
  CHECK(lf.target->in_fundamental_domain(lf.vertex_values.col(5)));
}

TEST_CASE("sbv check rejects a corrupted record") {
  LiftedField lf = vortex_lift();
  CHECK(sbv_check(lf, vortex32()).passed());
  lf.bv.cantor = 0.1;
  CHECK(!sbv_check(lf, vortex32()).cantor_zero);
  lf = vortex_lift();
  lf.bv.total += 1e-3;
  CHECK(!sbv_check(lf, vortex32()).decomposition_exact);
}

TEST_CASE("strict mode aborts on a jump above the bound") {
  LiftConfig cfg;
  cfg.C_jump_override = 1.0;
  const PiecewiseAffineMap u = field_map("vortex", 12);
  CHECK(kind_of([&] { lift_pa_field(u, circle_grid(), cfg); }) == ErrorKind::BoundViolation);
  cfg.strict = false;
  const LiftedField lf = lift_pa_field(u, circle_grid(), cfg);
  CHECK(lf.bound_violation);
}

TEST_CASE("lifting without certified constants is refused") {
  const Scaffold raw = build_generic_scaffold(make_target("circle"), 8, 2.0, 0.25);
  CHECK(kind_of([&] { lift_pa_field(field_map("constant", 4), raw); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("so3 mod V4: two defects with non-commuting monodromy") {
  const TargetPtr t = make_target("so3_mod_v4");
  Scaffold s = build_analytic_scaffold(t, 2.0, 0.2);
  s.set_constants(1.35, 8.0);
  const PiecewiseAffineMap u = field_map("two_defect", 24);
  const Vec x0 = Vec2(0.03, -0.52);
  LiftConfig cfg;
  cfg.trials = 8;
  cfg.u_star = t->project(two_defect_lift(x0));
  cfg.w_anchor = two_defect_lift(x0);
  const LiftedField lf = lift_pa_field(u, s, cfg);
  CHECK(lf.max_jump() <= lf.constants.C_jump);

  const std::vector<Vec> la{x0, Vec2(0.03, 0.55), Vec2(-0.83, 0.55), Vec2(-0.83, -0.52)};
  const std::vector<Vec> lb{x0, Vec2(0.87, -0.52), Vec2(0.87, 0.55), Vec2(0.03, 0.55)};
  std::vector<Vec> ab = la, ba = lb;
  ab.push_back(x0);
  ab.insert(ab.end(), lb.begin() + 1, lb.end());
  ab.back() = Vec2(0.03, 0.551);
  ba.back() = Vec2(0.03, 0.551);
  ba.push_back(x0);
  ba.insert(ba.end(), la.begin() + 1, la.end());

  const auto name = [&](const std::vector<Vec>& loop) { return t->deck_name(loop_monodromy(lf, loop)); };
  CHECK(name(la) == "i");
  CHECK(name(lb) == "j");
  CHECK(name(ab) == "k");
  CHECK(name(ba) == "-k");
  CHECK(sbv_check(lf, u).passed());
}

TEST_CASE("record serialization") {
  const LiftedField& lf = vortex_lift();
  const nlohmann::json j = to_json(lf);
  CHECK(j.at("facets").size() == lf.facets.size());
  std::ostringstream os;
  write_geometry(lf, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(lf.facets.size()));
}
