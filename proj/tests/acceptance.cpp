// Acceptance run: one PASS/FAIL line per criterion.
#include "liftbv/field.hpp"
#include "liftbv/lift.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace liftbv;

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    detail += (detail.empty() ? "" : "; ") + std::string(buf);
  }
};

struct Run {
  Run(std::string n, PiecewiseAffineMap map) : name(std::move(n)), u(std::move(map)) {}
  std::string name;
  PiecewiseAffineMap u;
  LiftedField lf;
};

PiecewiseAffineMap field_map(const std::string& kind, int res) { return interpolate_pa(synthetic_field(kind, res, 1.75)).map; }

std::vector<Vec> two_defect_loop(bool a_first) {
  const Vec x0 = Vec2(0.03, -0.52);
  const std::vector<Vec> la{x0, Vec2(0.03, 0.55), Vec2(-0.83, 0.55), Vec2(-0.83, -0.52)};
  const std::vector<Vec> lb{x0, Vec2(0.87, -0.52), Vec2(0.87, 0.55), Vec2(0.03, 0.551)};
  std::vector<Vec> out = a_first ? la : lb;
  const auto& second = a_first ? lb : la;
  out.push_back(x0);
  out.insert(out.end(), second.begin() + 1, second.end());
  return out;
}

// Connected components of facets glued at shared vertices.
int facet_components(const std::vector<JumpFacet>& facets) {
  std::vector<int> parent(facets.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (std::size_t i = 0; i < facets.size(); ++i)
    for (std::size_t j = i + 1; j < facets.size(); ++j) {
      bool touch = false;
      for (const Vec& a : facets[i].vertices)
        for (const Vec& b : facets[j].vertices) touch = touch || (a - b).norm() < 1e-7;
      if (touch) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
    }
  int n = 0;
  for (std::size_t i = 0; i < facets.size(); ++i) n += find(static_cast<int>(i)) == static_cast<int>(i);
  return n;
}

// Dense-sampling arclength of z -> z/|z| along [a, b].
double angle_arclength(const Vec& a, const Vec& b, int n) {
  double len = 0.0;
  Vec prev = a.normalized();
  for (int i = 1; i <= n; ++i) {
    const Vec z = (a + (b - a) * (static_cast<double>(i) / n)).normalized();
    len += 2 * std::asin(std::min(1.0, 0.5 * (z - prev).norm()));
    prev = z;
  }
  return len;
}

// True when one deck element carries every vertex value of a onto b.
bool global_deck_shift(const LiftedField& a, const LiftedField& b, std::string& name) {
  const CoverTarget& t = *a.target;
  const DeckElement g = t.deck_identify(a.vertex_values.col(0), b.vertex_values.col(0), 1e-6);
  name = t.deck_name(g);
  for (Eigen::Index c = 0; c < a.vertex_values.cols(); ++c)
    if ((t.deck_apply(g, a.vertex_values.col(c)) - b.vertex_values.col(c)).norm() > 1e-9) return false;
  return true;
}

double step_halving_gap(const Run& r, const Scaffold& s, int points, std::uint64_t seed) {
  const Homotopy h{r.u, r.lf.u_star};
  PathOptions fine;
  fine.step_fraction = 0.25;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.95, 0.95);
  double gap = 0.0;
  for (int i = 0; i < points; ++i) {
    const Vec x = Vec2(U(rng), U(rng));
    try {
      const Vec a = cylinder_lift(h, s, r.lf.y, x, r.lf.w_anchor);
      const Vec b = cylinder_lift(h, s, r.lf.y, x, r.lf.w_anchor, fine);
      gap = std::max(gap, (a - b).norm());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NearJump) throw;
    }
  }
  return gap;
}

void report(int k, const Outcome& o, int& failed) {
  std::printf("criterion %2d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  failed += !o.pass;
}

}  // namespace

int main() {
  int failed = 0;
  const TargetPtr circle = make_target("circle");
  Scaffold grid = build_generic_scaffold(circle, 8, 2.0, 0.25);

  // 1. Retraction audit.
  {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(11);
    double resid = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vec z = circle->sample_N(rng);
      resid = std::max(resid, (grid.rho(z) - z).norm());
    }
    const AuditReport a = audit_scaffold(grid, 500, 7);
    certify(grid, a);
    const double secs = seconds_since(t0);
    o.require(resid <= 1e-9, "identity residual");
    o.require(a.C0_stable, "C0 stable within 5%");
    o.require(a.C1_stable, "C1 stable within 5%");
    o.require(secs < 30, "runtime < 30 s");
    o.note("residual %.2e on 1e4 samples, C0 %.4f -> %.4f, C1 %.4f -> %.4f, %.1f s", resid, a.C0_estimate, a.C0_refined,
           a.C1_estimate, a.C1_refined, secs);
    report(1, o, failed);
  }

  // 2. Segment-image bound.
  {
    Outcome o;
    const Scaffold analytic = build_analytic_scaffold(circle, 2.0, 0.25);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-analytic.Lambda(), analytic.Lambda());
    double worst = 0.0, worst_oracle = 0.0, gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec a = Vec2(U(rng), U(rng)), b = Vec2(U(rng), U(rng));
      const double len = segment_image_length(analytic, a, b, 1e-6);
      const double oracle = angle_arclength(a, b, 20000);
      worst = std::max(worst, len);
      worst_oracle = std::max(worst_oracle, oracle);
      gap = std::max(gap, std::abs(len - oracle));
    }
    o.require(worst <= kPi + 1e-3 && worst_oracle <= kPi + 1e-3, "analytic arclength <= pi");
    o.require(gap <= 1e-3, "agreement with the dense-sampling oracle");

    std::uniform_real_distribution<double> V(-grid.M() * (1 - 1e-6), grid.M() * (1 - 1e-6));
    double worst_grid = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec a = Vec2(V(rng), V(rng)), b = Vec2(V(rng), V(rng));
      try {
        worst_grid = std::max(worst_grid, segment_image_length(grid, a, b, 5e-5));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularPoint && e.kind() != ErrorKind::NearSingular) throw;
      }
    }
    o.require(worst_grid <= grid.C1(), "generic arclength <= certified C1");
    o.note("analytic max %.6f (oracle %.6f, gap %.1e), generic max %.4f vs C1 %.4f", worst, worst_oracle, gap,
           worst_grid, grid.C1());
    report(2, o, failed);
  }

  // 3. Coarea inequality.
  {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const CoareaCheck id = coarea_bound_check(Mat::Identity(2, 2), Vec2(0, 0), Vec2(0, 0), Vec2(-1, -1), Vec2(1, 1), 64);
    const double lhs_exact = 4 * (std::sqrt(2.0) + std::log(1 + std::sqrt(2.0))) / 6;
    const double rhs_exact = 2 * std::sqrt(2.0) * 4 * (std::sqrt(2.0) + std::log(1 + std::sqrt(2.0))) / 3;
    o.require(id.holds, "identity instance");
    o.require(std::abs(id.lhs - lhs_exact) <= 0.02 * lhs_exact, "identity lhs");
    o.require(std::abs(id.rhs - rhs_exact) <= 1e-3 * rhs_exact, "identity rhs");
    std::mt19937_64 rng(31);
    std::normal_distribution<double> G;
    int fails = 0;
    double worst = 0.0;
    for (int d : {2, 3})
      for (int i = 0; i < 100; ++i) {
        Mat B(2, d);
        for (Eigen::Index k = 0; k < B.size(); ++k) B.data()[k] = G(rng);
        const Vec c = Vec2(G(rng), G(rng)), v = Vec2(G(rng), G(rng));
        const CoareaCheck r = coarea_bound_check(B, c, v, Vec::Constant(d, -1), Vec::Constant(d, 1), 24);
        fails += !r.holds;
        worst = std::max(worst, r.lhs / r.rhs);
      }
    const double secs = seconds_since(t0);
    o.require(fails == 0, "random affine maps");
    o.require(secs < 120, "runtime < 2 min");
    o.note("identity %.4f vs %.4f, 200 random maps max lhs/rhs %.3f, %.1f s", id.lhs, id.rhs, worst, secs);
    report(3, o, failed);
  }

  // 4. Averaged bounds.
  {
    Outcome o;
    const LiftConstants c = lift_constants(grid, Vec2(0, 0));
    for (const char* kind : {"vortex", "smooth"}) {
      const PiecewiseAffineMap u = field_map(kind, 16);
      const Homotopy h{u, default_anchor(u, *circle)};
      const AveragedBounds b = averaged_bounds(h, grid, 200, 5);
      o.require(b.shifts >= 200 && b.certified >= 190, std::string(kind) + " shift count");
      o.require(b.grad_ratio() <= c.C_grad, std::string(kind) + " gradient bound");
      o.require(b.mean_T_doubled <= c.C_T * b.weighted_variation + 1e-12, std::string(kind) + " shadow bound");
      o.require(b.stable(0.10), std::string(kind) + " stable under doubling");
      o.note("%s: grad %.4f/%.4f (ratio %.3f <= %.1f), T %.4f/%.4f (ratio %.3f <= %.1f)", kind, b.mean_grad,
             b.mean_grad_doubled, b.grad_ratio(), c.C_grad, b.mean_T, b.mean_T_doubled, b.T_ratio(), c.C_T);
    }
    report(4, o, failed);
  }

  // Lifting runs shared by criteria 5 to 10.
  std::vector<Run> runs;
  LiftConfig plain;
  plain.normalize = false;
  runs.emplace_back("vortex32", field_map("vortex", 32));
  runs.back().lf = lift_pa_field(runs.back().u, grid, plain);

  const auto t6 = std::chrono::steady_clock::now();
  runs.emplace_back("vortex128", field_map("vortex", 128));
  runs.back().lf = lift_pa_field(runs.back().u, grid);
  const double vortex128_secs = seconds_since(t6);

  runs.emplace_back("smooth64", field_map("smooth", 64));
  runs.back().lf = lift_pa_field(runs.back().u, grid);

  const TargetPtr quat = make_target("so3_mod_v4");
  Scaffold qs = build_analytic_scaffold(quat, 2.0, 0.2);
  const AuditReport qa = audit_scaffold(qs, 300, 7);
  certify(qs, qa);
  const Vec x0 = Vec2(0.03, -0.52);
  LiftConfig qcfg;
  qcfg.trials = 8;
  qcfg.normalize = false;
  qcfg.u_star = quat->project(two_defect_lift(x0));
  qcfg.w_anchor = two_defect_lift(x0);
  runs.emplace_back("two_defect32", field_map("two_defect", 32));
  runs.back().lf = lift_pa_field(runs.back().u, qs, qcfg);
  const Run& v32 = runs[0];
  const Run& v128 = runs[1];
  const Run& smooth = runs[2];
  const Run& two = runs[3];

  // 5. Lifting identity and uniqueness.
  {
    Outcome o;
    double resid = 0.0;
    for (const Run& r : runs) resid = std::max(resid, r.lf.lift_residual);
    o.require(resid <= 1e-6, "lift residual");
    const double gap = std::max(step_halving_gap(v32, grid, 40, 3), step_halving_gap(two, qs, 20, 4));
    o.require(gap < 1e-8, "step halving");

    LiftConfig moved = plain;
    moved.anchor_deck = circle->deck_parse("t^3");
    const LiftedField other = lift_pa_field(v32.u, grid, moved);
    std::string g1, g2;
    o.require(global_deck_shift(v32.lf, other, g1), "vortex anchors differ by one deck element");
    LiftConfig flipped = qcfg;
    flipped.w_anchor = quat->deck_apply(quat->deck_parse("-1"), *qcfg.w_anchor);
    const LiftedField other_q = lift_pa_field(two.u, qs, flipped);
    o.require(global_deck_shift(two.lf, other_q, g2), "two-defect anchors differ by one deck element");
    o.note("max residual %.1e over %zu runs, step-halving gap %.1e, anchor shifts %s and %s", resid, runs.size(), gap,
           g1.c_str(), g2.c_str());
    report(5, o, failed);
  }

  // 6. Vortex at 128^2.
  {
    Outcome o;
    const LiftedField& lf = v128.lf;
    bool same = !lf.facets.empty();
    double extent = 0.0;
    for (const auto& f : lf.facets) {
      same = same && f.label_name == lf.facets.front().label_name;
      for (const auto& g : lf.facets)
        for (const Vec& a : f.vertices)
          for (const Vec& b : g.vertices) extent = std::max(extent, (a - b).norm());
    }
    const std::string label = lf.facets.empty() ? "none" : lf.facets.front().label_name;
    const int curves = facet_components(lf.facets);
    o.require(same && (label == "t" || label == "t^-1"), "single generator label");
    o.require(curves == 1, "one jump curve");
    o.require(std::abs(lf.bv.jump - 2 * kPi * extent) <= 0.05 * 2 * kPi * extent, "jump = 2 pi x cut length");
    o.require(lf.bv.total <= lf.constants.C_tv * lf.tv_u, "|Dv| <= C |grad u|");
    o.require(vortex128_secs < 120, "runtime < 2 min");
    o.note("%zu facets, label %s, %d curve(s), jump %.5f vs 2pi x %.5f = %.5f, |Dv| %.4f <= %.4g x %.4f, %.1f s",
           lf.facets.size(), label.c_str(), curves, lf.bv.jump, extent, 2 * kPi * extent, lf.bv.total,
           lf.constants.C_tv, lf.tv_u, vortex128_secs);
    report(6, o, failed);
  }

  // 7. Smooth control.
  {
    Outcome o;
    const double exact = smooth_field_tv();
    o.require(smooth.lf.facets.empty(), "empty jump complex");
    o.require(std::abs(smooth.lf.bv.total - exact) <= 0.02 * exact, "|Dv| within 2%");
    o.note("%zu facets, |Dv| %.5f vs %.5f (%.2f%%)", smooth.lf.facets.size(), smooth.lf.bv.total, exact,
           100 * std::abs(smooth.lf.bv.total - exact) / exact);
    report(7, o, failed);
  }

  // 8. Non-abelian monodromy.
  {
    Outcome o;
    const LiftedField& lf = two.lf;
    const std::string ab = quat->deck_name(loop_monodromy(lf, two_defect_loop(true)));
    const std::string ba = quat->deck_name(loop_monodromy(lf, two_defect_loop(false)));
    int inconsistent = 0, traced = 0;
    for (const auto& f : lf.facets)
      for (std::size_t i = 0; i < f.plus.size(); ++i, ++traced)
        inconsistent += !(quat->deck_identify(f.minus[i], f.plus[i], 1e-6) == f.label);
    o.require(qa.ok(), "so3_mod_v4 scaffold audit");
    o.require(ab == "k", "A then B gives k");
    o.require(ba == "-k", "B then A gives -k");
    o.require(inconsistent == 0, "labels constant per facet");
    o.require(lf.max_jump() <= lf.constants.C_jump, "facet jumps <= C");
    o.note("AB %s, BA %s, %d/%d trace pairs off-label over %zu facets, max jump %.4f <= %.4f", ab.c_str(), ba.c_str(),
           inconsistent, traced, lf.facets.size(), lf.max_jump(), lf.constants.C_jump);
    report(8, o, failed);
  }

  // 9. SBV clause.
  {
    Outcome o;
    for (const Run& r : runs) {
      const SbvReport s = sbv_check(r.lf, r.u);
      o.require(r.lf.bv.cantor == 0.0 && r.lf.bv.total == r.lf.bv.ac + r.lf.bv.jump, r.name + " decomposition");
      o.require(s.passed(), r.name + " sbv check");
    }
    LiftedField bad = v32.lf;
    bad.bv.cantor = 1e-3;
    bad.bv.total += 1e-3;
    const bool caught_cantor = !sbv_check(bad, v32.u).passed();
    bad = v32.lf;
    bad.bv.total = std::nextafter(bad.bv.total, 1e300);
    const bool caught_sum = !sbv_check(bad, v32.u).passed();
    o.require(caught_cantor && caught_sum, "corrupted records rejected");
    o.note("%zu runs with zero Cantor part and exact decomposition, corruption controls rejected", runs.size());
    report(9, o, failed);
  }

  // 10. Jump bound.
  {
    Outcome o;
    double worst_ratio = 0.0;
    for (const Run& r : runs) {
      worst_ratio = std::max(worst_ratio, r.lf.max_jump() / r.lf.constants.C_jump);
      o.require(r.lf.max_jump() <= r.lf.constants.C_jump, r.name + " max jump");
    }
    LiftConfig shrunk;
    shrunk.C_jump_override = 0.5 * v32.lf.max_jump();
    bool aborted = false;
    try {
      lift_pa_field(field_map("vortex", 16), grid, shrunk);
    } catch (const Error& e) {
      aborted = e.kind() == ErrorKind::BoundViolation;
    }
    o.require(aborted, "strict mode aborts on a shrunk bound");
    o.note("max jump / C over the suite %.3f, shrunk-bound run aborted", worst_ratio);
    report(10, o, failed);
  }

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
