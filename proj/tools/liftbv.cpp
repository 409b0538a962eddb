// liftbv command-line front end.
#include "liftbv/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

using namespace liftbv;
using nlohmann::json;

namespace {

struct FieldArgs {
  std::string input;
  std::string synthetic;
  int resolution = 32;
  double lambda = 1.75;

  void add(CLI::App* cmd) {
    cmd->add_option("--input", input, "field file");
    cmd->add_option("--synthetic", synthetic, "synthetic field kind");
    cmd->add_option("--resolution", resolution, "synthetic field resolution");
    cmd->add_option("--lambda", lambda, "sample box half-width");
  }
  SampledField load() const {
    if (!synthetic.empty()) return synthetic_field(synthetic, resolution, lambda);
    if (input.empty()) fail(ErrorKind::InvalidArgument, "need --input or --synthetic");
    return read_field_file(input);
  }
};

struct ScaffoldArgs {
  std::string file;
  int q = 8;
  double M = 2.0;
  double sigma = 0.25;

  void add(CLI::App* cmd) {
    cmd->add_option("--scaffold", file, "scaffold file");
    cmd->add_option("--q", q, "grid cubes per half-axis");
    cmd->add_option("--M", M, "cube half-width");
    cmd->add_option("--sigma", sigma, "shift radius");
  }
  Scaffold get(const TargetPtr& t) const {
    if (!file.empty()) {
      std::ifstream is(file);
      if (!is) fail(ErrorKind::IngestError, "cannot open '" + file + "'");
      return Scaffold::load(is);
    }
    if (t->id() == "circle" || t->id() == "clifford_torus") return build_generic_scaffold(t, q, M, sigma);
    return build_analytic_scaffold(t, M, sigma);
  }
};

json audit_json(const AuditReport& r) {
  return {{"identity_residual", r.identity_residual},
          {"C0_estimate", r.C0_estimate},
          {"C0_refined", r.C0_refined},
          {"C0_stable", r.C0_stable},
          {"C1_estimate", r.C1_estimate},
          {"C1_refined", r.C1_refined},
          {"C1_stable", r.C1_stable},
          {"segments", r.segments_used},
          {"ok", r.ok()}};
}

void save_scaffold(const Scaffold& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IngestError, "cannot write '" + path + "'");
  s.save(os);
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

int show_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IngestError, "cannot open '" + path + "'");
  json r;
  try {
    r = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorKind::IngestError, std::string("report: ") + e.what());
  }
  const json& f = r.at("field");
  const json& m = r.at("measures");
  std::printf("field      %s (%s), %zu samples, %d clamped\n", f.at("source").get<std::string>().c_str(),
              f.at("target").get<std::string>().c_str(), f.at("samples").get<std::size_t>(), f.at("clamped").get<int>());
  const json& s = r.at("scaffold");
  std::printf("scaffold   %s, sigma %g, C0 %.4g, C1 %.4g (%s)\n", s.at("kind").get<std::string>().c_str(),
              s.at("sigma").get<double>(), s.at("C0").get<double>(), s.at("C1").get<double>(),
              s.at("constants_source").get<std::string>().c_str());
  std::printf("|grad u|   %.6g\n", m.at("tv_u").get<double>());
  std::printf("|Dv|       %.6g = %.6g (ac) + %.6g (jump), cantor %.3g\n", m.at("total").get<double>(),
              m.at("ac").get<double>(), m.at("jump").get<double>(), m.at("cantor").get<double>());
  const json& lift = r.at("lift");
  std::printf("jumps      %zu facets\n", lift.at("facets").size());
  for (const auto& [name, row] : lift.at("labels").items())
    std::printf("  %-8s %d facets, measure %.6g\n", name.c_str(), row.at("facets").get<int>(), row.at("measure").get<double>());
  for (const json& l : r.at("monodromy"))
    std::printf("loop %-6s %s\n", l.at("loop").get<std::string>().c_str(), l.at("label").get<std::string>().c_str());
  for (const json& c : r.at("checks"))
    std::printf("[%s] %s: %.6g (tol %.3g)\n", c.at("passed").get<bool>() ? "pass" : "FAIL",
                c.at("name").get<std::string>().c_str(), c.at("value").get<double>(), c.at("tolerance").get<double>());
  return r.at("passed").get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifting of manifold-valued BV fields into the universal cover"};
  app.require_subcommand(1);
  int status = 0;

  // field make
  auto* field = app.add_subcommand("field", "synthetic field files")->require_subcommand(1);
  auto* make = field->add_subcommand("make", "write a synthetic field");
  std::string make_kind, make_out;
  int make_res = 32;
  double make_lambda = 1.75;
  make->add_option("kind", make_kind, "vortex, smooth, constant, two_defect or line")->required();
  make->add_option("--resolution", make_res, "cells per axis");
  make->add_option("--lambda", make_lambda, "sample box half-width");
  make->add_option("-o,--output", make_out, "output file")->required();
  make->callback([&] { write_field_file(synthetic_field(make_kind, make_res, make_lambda), make_out); });

  // scaffold build|audit
  auto* scaffold = app.add_subcommand("scaffold", "retraction scaffolds")->require_subcommand(1);
  auto* build = scaffold->add_subcommand("build", "build a scaffold and write it to a file");
  std::string b_target = "circle", b_kind, b_out;
  int b_q = 8;
  double b_M = 2.0, b_sigma = 0.25;
  build->add_option("--target", b_target, "circle, clifford_torus, so3 or so3_mod_v4");
  build->add_option("--kind", b_kind, "generic or analytic");
  build->add_option("--q", b_q, "grid cubes per half-axis");
  build->add_option("--M", b_M, "cube half-width");
  build->add_option("--sigma", b_sigma, "shift radius");
  build->add_option("-o,--output", b_out, "output file")->required();
  build->callback([&] {
    const TargetPtr t = make_target(b_target);
    std::string kind = b_kind;
    if (kind.empty()) kind = (t->id() == "circle" || t->id() == "clifford_torus") ? "generic" : "analytic";
    if (kind != "generic" && kind != "analytic") fail(ErrorKind::InvalidArgument, "unknown scaffold kind '" + kind + "'");
    const Scaffold s = kind == "generic" ? build_generic_scaffold(t, b_q, b_M, b_sigma) : build_analytic_scaffold(t, b_M, b_sigma);
    save_scaffold(s, b_out);
    print({{"target", t->id()}, {"kind", kind}, {"W", s.W().size()}, {"X", s.dual_pieces().size()}, {"Lambda", s.Lambda()}});
  });

  auto* audit = scaffold->add_subcommand("audit", "estimate and certify C0, C1");
  std::string a_file, a_out;
  int a_samples = 500;
  std::uint64_t a_seed = 7;
  audit->add_option("file", a_file, "scaffold file")->required();
  audit->add_option("--samples", a_samples, "audit sample count");
  audit->add_option("--seed", a_seed, "random seed");
  audit->add_option("-o,--output", a_out, "write the certified scaffold here (default: in place)");
  audit->callback([&] {
    std::ifstream is(a_file);
    if (!is) fail(ErrorKind::IngestError, "cannot open '" + a_file + "'");
    Scaffold s = Scaffold::load(is);
    const AuditReport r = audit_scaffold(s, a_samples, a_seed);
    json j = audit_json(r);
    if (r.ok()) {
      certify(s, r);
      save_scaffold(s, a_out.empty() ? a_file : a_out);
      j["C0"] = s.C0();
      j["C1"] = s.C1();
    }
    print(j);
    if (!r.ok()) status = 2;
  });

  // shift select
  auto* shift = app.add_subcommand("shift", "shift selection")->require_subcommand(1);
  auto* select = shift->add_subcommand("select", "draw shifts and pick one by the median rule");
  FieldArgs s_field;
  ScaffoldArgs s_scaffold;
  int s_trials = 16;
  std::uint64_t s_seed = 1;
  s_field.add(select);
  s_scaffold.add(select);
  select->add_option("--trials", s_trials, "number of shifts");
  select->add_option("--seed", s_seed, "random seed");
  select->callback([&] {
    const SampledField f = s_field.load();
    const Interpolation in = interpolate_pa(f);
    const TargetPtr t = make_target(f.target);
    const Scaffold sc = s_scaffold.get(t);
    const Homotopy h{in.map, default_anchor(in.map, *t)};
    const ShiftSelection sel = select_shift(h, sc, s_trials, s_seed);
    json trials = json::array();
    for (const auto& tr : sel.trials)
      trials.push_back({{"y", std::vector<double>(tr.y.data(), tr.y.data() + tr.y.size())},
                        {"grad_l1", tr.grad_l1},
                        {"T_measure", tr.T_measure},
                        {"score", tr.score},
                        {"certificate", tr.certificate},
                        {"reason", tr.reason}});
    print({{"accepted", sel.accepted},
           {"y", std::vector<double>(sel.y.data(), sel.y.data() + sel.y.size())},
           {"median", sel.median},
           {"trials", trials}});
  });

  // lift run
  auto* lift = app.add_subcommand("lift", "lifting")->require_subcommand(1);
  auto* run = lift->add_subcommand("run", "run the full pipeline from a config file");
  std::string r_config;
  bool r_lenient = false;
  run->add_option("--config", r_config, "pipeline config (JSON)")->required();
  run->add_flag("--lenient", r_lenient, "record failed checks without a failing exit status");
  run->callback([&] {
    std::ifstream is(r_config);
    if (!is) fail(ErrorKind::IngestError, "cannot open '" + r_config + "'");
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      fail(ErrorKind::IngestError, std::string("config: ") + e.what());
    }
    PipelineConfig cfg = PipelineConfig::from_json(j);
    if (r_lenient) cfg.strict = false;
    const PipelineReport rep = run_pipeline(cfg);
    if (cfg.output_dir.empty()) print(rep.to_json());
    else std::cout << cfg.output_dir << "/report.json\n";
    if (cfg.strict && !rep.passed()) status = 2;
  });

  // verify coarea|lemma23
  auto* verify = app.add_subcommand("verify", "numerical checks of the bound chain")->require_subcommand(1);
  auto* coarea = verify->add_subcommand("coarea", "coarea inequality on random affine maps");
  int c_count = 100, c_res = 24;
  std::uint64_t c_seed = 31;
  coarea->add_option("--count", c_count, "maps per dimension");
  coarea->add_option("--resolution", c_res, "quadrature cells per axis");
  coarea->add_option("--seed", c_seed, "random seed");
  coarea->callback([&] {
    std::mt19937_64 rng(c_seed);
    std::normal_distribution<double> G;
    json out = json::array();
    int failed = 0;
    const CoareaCheck id = coarea_bound_check(Mat::Identity(2, 2), Vec2(0, 0), Vec2(0, 0), Vec2(-1, -1), Vec2(1, 1), 64);
    out.push_back({{"map", "identity"}, {"lhs", id.lhs}, {"rhs", id.rhs}, {"holds", id.holds}});
    failed += !id.holds;
    for (int d : {2, 3}) {
      double worst = 0.0;
      int fails = 0;
      for (int i = 0; i < c_count; ++i) {
        Mat B(2, d);
        for (Eigen::Index k = 0; k < B.size(); ++k) B.data()[k] = G(rng);
        const Vec c = Vec2(G(rng), G(rng)), v = Vec2(G(rng), G(rng));
        const CoareaCheck r = coarea_bound_check(B, c, v, Vec::Constant(d, -1), Vec::Constant(d, 1), c_res);
        fails += !r.holds;
        worst = std::max(worst, r.lhs / r.rhs);
      }
      out.push_back({{"dim", d}, {"maps", c_count}, {"failures", fails}, {"max_lhs_over_rhs", worst}});
      failed += fails;
    }
    print(out);
    if (failed) status = 2;
  });

  auto* lemma = verify->add_subcommand("lemma23", "y-averaged gradient and shadow bounds");
  FieldArgs l_field;
  ScaffoldArgs l_scaffold;
  int l_shifts = 200;
  std::uint64_t l_seed = 5;
  double l_tol = 0.10;
  l_field.add(lemma);
  l_scaffold.add(lemma);
  lemma->add_option("--shifts", l_shifts, "shift count (doubled for the stability check)");
  lemma->add_option("--seed", l_seed, "random seed");
  lemma->add_option("--tolerance", l_tol, "relative stability tolerance");
  lemma->callback([&] {
    const SampledField f = l_field.load();
    const Interpolation in = interpolate_pa(f);
    const TargetPtr t = make_target(f.target);
    const Scaffold sc = l_scaffold.get(t);
    const Homotopy h{in.map, default_anchor(in.map, *t)};
    const AveragedBounds b = averaged_bounds(h, sc, l_shifts, l_seed);
    print({{"shifts", b.shifts},
           {"certified", b.certified},
           {"tv_u", b.tv_u},
           {"weighted_variation", b.weighted_variation},
           {"mean_grad", b.mean_grad},
           {"mean_grad_doubled", b.mean_grad_doubled},
           {"mean_T", b.mean_T},
           {"mean_T_doubled", b.mean_T_doubled},
           {"grad_ratio", b.grad_ratio()},
           {"T_ratio", b.T_ratio()},
           {"stable", b.stable(l_tol)}});
    if (!b.stable(l_tol)) status = 2;
  });

  // report show
  auto* report = app.add_subcommand("report", "pipeline reports")->require_subcommand(1);
  auto* show = report->add_subcommand("show", "summarize a report file");
  std::string show_path;
  show->add_option("file", show_path, "report.json")->required();
  show->callback([&] { status = show_report(show_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "liftbv: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument ? 1 : exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "liftbv: " << e.what() << '\n';
    return 1;
  }
  return status;
}
