#include "liftbv/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace liftbv {

namespace {

using nlohmann::json;

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_to_vec(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::InvalidArgument, std::string("config: '") + what + "' must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) fail(ErrorKind::InvalidArgument, "config: unknown key '" + k + "' in " + where);
}

std::string strip_kind(const Error& e) {
  const std::string w = e.what();
  const auto pos = w.find(": ");
  return pos == std::string::npos ? w : w.substr(pos + 2);
}

class Stages {
 public:
  template <class F>
  auto run(const char* name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(name, start);
      } else {
        auto r = f();
        record(name, start);
        return r;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(name) + ": " + strip_kind(e));
    }
  }
  json timing = json::object();

 private:
  void record(const char* name, std::chrono::steady_clock::time_point start) {
    timing[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

CheckResult check_le(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol, {}};
}

CheckResult check_flag(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)};
}

SampledField load_field(const PipelineConfig& cfg, int resolution) {
  if (!cfg.synthetic.empty()) return synthetic_field(cfg.synthetic, resolution, cfg.lambda);
  return read_field_file(cfg.input);
}

Scaffold make_scaffold(const PipelineConfig& cfg, const TargetPtr& target, json& info, std::vector<CheckResult>& checks) {
  Scaffold s = [&] {
    if (!cfg.scaffold_file.empty()) {
      std::ifstream is(cfg.scaffold_file);
      if (!is) fail(ErrorKind::IngestError, "cannot open scaffold file '" + cfg.scaffold_file + "'");
      return Scaffold::load(is);
    }
    std::string kind = cfg.scaffold_kind;
    if (kind.empty()) kind = (target->id() == "circle" || target->id() == "clifford_torus") ? "generic" : "analytic";
    if (kind == "generic") return build_generic_scaffold(target, cfg.q, cfg.M, cfg.sigma);
    if (kind == "analytic") return build_analytic_scaffold(target, cfg.M, cfg.sigma);
    fail(ErrorKind::InvalidArgument, "unknown scaffold kind '" + kind + "'");
  }();
  if (s.target().id() != target->id())
    fail(ErrorKind::InvalidArgument, "scaffold target '" + s.target().id() + "' does not match field target");

  std::string source = "file";
  if (cfg.constants) {
    s.set_constants(cfg.constants->first, cfg.constants->second);
    source = "preset";
  } else if (std::isnan(s.C0()) || std::isnan(s.C1())) {
    const AuditReport r = audit_scaffold(s, cfg.audit_samples, cfg.audit_seed);
    certify(s, r);
    source = "audit";
    info["audit"] = {{"samples", cfg.audit_samples},
                     {"seed", cfg.audit_seed},
                     {"identity_residual", r.identity_residual},
                     {"C0_estimate", r.C0_estimate},
                     {"C0_refined", r.C0_refined},
                     {"C1_estimate", r.C1_estimate},
                     {"C1_refined", r.C1_refined},
                     {"segments", r.segments_used}};
    checks.push_back(check_le("audit identity residual", r.identity_residual, 1e-9));
    checks.push_back(check_flag("audit constants stable", r.C0_stable && r.C1_stable));
  }
  info["kind"] = s.kind() == ScaffoldKind::GenericGrid ? "generic" : "analytic";
  info["target"] = s.target().id();
  info["q"] = s.q();
  info["M"] = s.M();
  info["sigma"] = s.sigma();
  info["Lambda"] = s.Lambda();
  info["C0"] = s.C0();
  info["C1"] = s.C1();
  info["constants_source"] = source;
  return s;
}

LiftConfig lift_config(const PipelineConfig& cfg, const PiecewiseAffineMap& u, const CoverTarget& t) {
  LiftConfig lc;
  lc.trials = cfg.trials;
  lc.seed = cfg.seed;
  lc.strict = cfg.strict;
  lc.C_jump_override = cfg.C_jump_override;
  std::optional<Vec> lift = cfg.anchor_lift;
  if (!lift && cfg.anchor_point && cfg.synthetic == "two_defect") lift = two_defect_lift(*cfg.anchor_point);
  if (lift) {
    lc.u_star = t.project(*lift);
    lc.w_anchor = *lift;
  } else if (cfg.anchor_point) {
    const auto p = t.nearest_N(u.eval(*cfg.anchor_point));
    if (!p) fail(ErrorKind::InvalidArgument, "anchor point maps onto the singular set of the projection");
    lc.u_star = *p;
  }
  return lc;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  try {
    reject_unknown(j,
                   {"input", "synthetic", "target", "scaffold", "q", "M", "sigma", "trials", "seed", "strict", "anchor",
                    "loops", "refinement", "tolerances", "output", "C_jump_override"},
                   "config");
    c.input = j.value("input", "");
    if (j.contains("synthetic")) {
      const json& s = j.at("synthetic");
      reject_unknown(s, {"kind", "resolution", "lambda"}, "synthetic");
      c.synthetic = s.at("kind").get<std::string>();
      c.resolution = s.value("resolution", c.resolution);
      c.lambda = s.value("lambda", c.lambda);
    }
    if (c.input.empty() && c.synthetic.empty()) fail(ErrorKind::InvalidArgument, "config: need 'input' or 'synthetic'");
    c.target = j.value("target", "");
    c.q = j.value("q", c.q);
    c.M = j.value("M", c.M);
    c.sigma = j.value("sigma", c.sigma);
    if (j.contains("scaffold")) {
      const json& s = j.at("scaffold");
      reject_unknown(s, {"file", "kind", "audit_samples", "audit_seed", "constants"}, "scaffold");
      c.scaffold_file = s.value("file", "");
      c.scaffold_kind = s.value("kind", "");
      c.audit_samples = s.value("audit_samples", c.audit_samples);
      c.audit_seed = s.value("audit_seed", c.audit_seed);
      if (s.contains("constants")) {
        const Vec k = json_to_vec(s.at("constants"), "scaffold.constants");
        if (k.size() != 2) fail(ErrorKind::InvalidArgument, "config: 'scaffold.constants' must be [C0, C1]");
        c.constants = std::make_pair(k(0), k(1));
      }
    }
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.strict = j.value("strict", c.strict);
    if (j.contains("anchor")) {
      const json& a = j.at("anchor");
      reject_unknown(a, {"point", "lift"}, "anchor");
      if (a.contains("point")) c.anchor_point = json_to_vec(a.at("point"), "anchor.point");
      if (a.contains("lift")) c.anchor_lift = json_to_vec(a.at("lift"), "anchor.lift");
    }
    for (const json& l : j.value("loops", json::array())) {
      reject_unknown(l, {"name", "points", "expect"}, "loop");
      LoopSpec ls;
      ls.name = l.at("name").get<std::string>();
      for (const json& p : l.at("points")) ls.points.push_back(json_to_vec(p, "loop point"));
      ls.expect = l.value("expect", "");
      c.loops.push_back(std::move(ls));
    }
    c.refinement = j.value("refinement", std::vector<int>{});
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      reject_unknown(t, {"residual", "interpolation", "refinement"}, "tolerances");
      c.residual_tol = t.value("residual", c.residual_tol);
      c.interpolation_tol = t.value("interpolation", c.interpolation_tol);
      c.refinement_tol = t.value("refinement", c.refinement_tol);
    }
    c.output_dir = j.value("output", "");
    c.C_jump_override = j.value("C_jump_override", 0.0);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  if (!c.refinement.empty() && c.synthetic.empty())
    fail(ErrorKind::InvalidArgument, "config: a refinement study needs a synthetic field");
  return c;
}

bool PipelineReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json PipelineReport::to_json() const {
  json out = body;
  json ledger = json::array();
  for (const auto& c : checks) {
    json e = {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    ledger.push_back(std::move(e));
  }
  out["checks"] = std::move(ledger);
  out["passed"] = passed();
  out["timing"] = timing;
  return out;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IngestError:
      return 3;
    case ErrorKind::BoundViolation:
      return 2;
    default:
      return 4;
  }
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  Stages st;
  PipelineReport rep;
  json& body = rep.body;
  body["tolerances"] = {{"residual", cfg.residual_tol},
                        {"interpolation", cfg.interpolation_tol},
                        {"refinement", cfg.refinement_tol},
                        {"decomposition", 0.0},
                        {"bound_slack", 1e-9}};

  const SampledField field = st.run("ingest", [&] {
    SampledField f = load_field(cfg, cfg.resolution);
    if (!cfg.target.empty() && cfg.target != f.target)
      fail(ErrorKind::IngestError, "field target '" + f.target + "' differs from configured '" + cfg.target + "'");
    return f;
  });
  body["field"] = {{"source", cfg.synthetic.empty() ? cfg.input : "synthetic:" + cfg.synthetic},
                   {"target", field.target},
                   {"lo", vec_json(field.lo)},
                   {"hi", vec_json(field.hi)},
                   {"resolution", field.resolution},
                   {"lambda", field.lambda},
                   {"samples", field.count()},
                   {"clamped", field.clamped}};

  const Interpolation in = st.run("interpolate", [&] { return interpolate_pa(field); });
  body["interpolation"] = {{"tv_u", in.total_variation}, {"vertex_residual", in.vertex_residual}};
  rep.checks.push_back(check_le("interpolation vertex residual", in.vertex_residual, cfg.interpolation_tol));

  const TargetPtr target = make_target(field.target);
  json sinfo;
  const Scaffold s = st.run("scaffold", [&] { return make_scaffold(cfg, target, sinfo, rep.checks); });
  body["scaffold"] = sinfo;

  const LiftConfig lc = lift_config(cfg, in.map, *target);
  const LiftedField lf = st.run("lift", [&] { return lift_pa_field(in.map, s, lc); });
  json lj = to_json(lf);
  body["lift"] = lj;
  body["measures"] = {{"tv_u", lf.tv_u},
                      {"ac", lf.bv.ac},
                      {"jump", lf.bv.jump},
                      {"cantor", lf.bv.cantor},
                      {"total", lf.bv.total},
                      {"geodesic_jump", lf.bv.geodesic_jump},
                      {"tv_ratio", lf.tv_u > 0 ? lf.bv.total / lf.tv_u : 0.0}};

  const SbvReport sbv = st.run("checks", [&] { return sbv_check(lf, in.map); });
  rep.checks.push_back(check_le("lift residual", lf.lift_residual, cfg.residual_tol));
  rep.checks.push_back(check_flag("cantor part zero", sbv.cantor_zero));
  rep.checks.push_back(
      {"total equals ac plus jump", std::abs(lf.bv.total - (lf.bv.ac + lf.bv.jump)), 0.0, sbv.decomposition_exact, {}});
  rep.checks.push_back(check_flag("lift Lipschitz off the jump set", sbv.lipschitz_finite,
                                  "max ratio " + std::to_string(sbv.max_lipschitz)));
  rep.checks.push_back(check_le("max facet jump", lf.max_jump(), lf.constants.C_jump * (1 + 1e-9)));
  rep.checks.push_back(check_le("total variation bound", lf.bv.total, lf.constants.C_tv * lf.tv_u * (1 + 1e-9)));

  json mono = json::array();
  st.run("monodromy", [&] {
    for (const LoopSpec& l : cfg.loops) {
      const std::string got = target->deck_name(loop_monodromy(lf, l.points));
      json e = {{"loop", l.name}, {"label", got}};
      if (!l.expect.empty()) {
        e["expect"] = l.expect;
        rep.checks.push_back(check_flag("monodromy " + l.name, got == l.expect, "got " + got + ", expected " + l.expect));
      }
      mono.push_back(std::move(e));
    }
  });
  body["monodromy"] = mono;

  if (!cfg.refinement.empty()) {
    json levels = json::array();
    std::vector<double> totals;
    st.run("refinement", [&] {
      for (int r : cfg.refinement) {
        const Interpolation ri = interpolate_pa(load_field(cfg, r));
        const LiftedField rl = lift_pa_field(ri.map, s, lift_config(cfg, ri.map, *target));
        levels.push_back({{"resolution", r},
                          {"tv_u", rl.tv_u},
                          {"ac", rl.bv.ac},
                          {"jump", rl.bv.jump},
                          {"total", rl.bv.total},
                          {"facets", rl.facets.size()}});
        totals.push_back(rl.bv.total);
      }
    });
    body["refinement"] = levels;
    if (totals.size() >= 2) {
      const double a = totals[totals.size() - 2], b = totals.back();
      const double rel = std::abs(b - a) / std::max(std::abs(b), 1e-300);
      rep.checks.push_back(check_le("refinement |Dv| change", b == a ? 0.0 : rel, cfg.refinement_tol));
    }
  }
  rep.timing = st.timing;

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    std::ofstream(dir / "report.json") << rep.to_json().dump(2) << '\n';
    std::ofstream(dir / "lift.json") << lj.dump(2) << '\n';
    std::ofstream geo(dir / "jumps.txt");
    write_geometry(lf, geo);
    std::ofstream vals(dir / "values.txt");
    vals.precision(17);
    for (Eigen::Index c = 0; c < lf.vertex_values.cols(); ++c) {
      for (Eigen::Index k = 0; k < lf.vertex_values.rows(); ++k) vals << (k ? " " : "") << lf.vertex_values(k, c);
      vals << '\n';
    }
  }
  return rep;
}

}  // namespace liftbv
