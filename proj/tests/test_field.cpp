#include "doctest.h"

#include "liftbv/field.hpp"

#include <cmath>
#include <functional>
#include <sstream>

using namespace liftbv;

namespace {

std::string ingest_message(const std::string& text) {
  std::istringstream is(text);
  try {
    read_field(is);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IngestError);
    return e.what();
  }
  FAIL("expected an ingest error");
  return {};
}

const char* kHeader =
    R"({"version":1,"target":"circle","box":{"lo":[0,0],"hi":[1,1]},"resolution":[1,1],"lambda":2})";

}  // namespace

TEST_CASE("field files round-trip exactly") {
  const SampledField f = synthetic_field("smooth", 7, 2.0);
  std::stringstream ss;
  write_field(f, ss);
  const SampledField g = read_field(ss);
  CHECK(g.target == "circle");
  CHECK(g.resolution == f.resolution);
  CHECK(g.lo == f.lo);
  CHECK(g.hi == f.hi);
  CHECK(g.lambda == f.lambda);
  CHECK(g.samples == f.samples);
  CHECK(g.clamped == 0);
}

TEST_CASE("rows run with axis 0 fastest") {
  std::istringstream is(std::string(kHeader) + "\n1 0\n0 1\n-1 0\n0 -1\n");
  const SampledField f = read_field(is);
  const Interpolation in = interpolate_pa(f);
  CHECK((in.map.eval(Vec2(1, 0)) - Vec2(0, 1)).norm() < 1e-15);
  CHECK((in.map.eval(Vec2(0, 1)) - Vec2(-1, 0)).norm() < 1e-15);
  CHECK(in.vertex_residual < 1e-15);
}

TEST_CASE("malformed input reports the line") {
  CHECK(ingest_message("").find("line 1") != std::string::npos);
  CHECK(ingest_message("{not json\n").find("line 1") != std::string::npos);
  const std::string h = std::string(kHeader) + "\n";
  CHECK(ingest_message(h + "1 0\n0 1\nnan 0\n0 -1\n").find("line 4") != std::string::npos);
  CHECK(ingest_message(h + "1 0\n0 1\n").find("found 2") != std::string::npos);
  CHECK(ingest_message(h + "1 0 3\n0 1\n-1 0\n0 -1\n").find("line 2") != std::string::npos);
  CHECK(ingest_message(h + "1 0\n0 1\n-1 0\n0 -1\n5 5\n").find("line 6") != std::string::npos);
  std::string bad = kHeader;
  bad.replace(bad.find("circle"), 6, "sphere");
  CHECK(ingest_message(bad + "\n").find("unknown target") != std::string::npos);
  std::string flat = kHeader;
  flat.replace(flat.find("\"hi\":[1,1]"), 10, "\"hi\":[0,1]");
  CHECK(ingest_message(flat + "\n").find("lo < hi") != std::string::npos);
}

TEST_CASE("samples outside the box are clamped") {
  std::istringstream is(std::string(kHeader) + "\n1 0\n3 1\n-1 -7\n0 -1\n");
  const SampledField f = read_field(is);
  CHECK(f.clamped == 2);
  CHECK(f.samples(0, 1) == 2.0);
  CHECK(f.samples(1, 2) == -2.0);
}

TEST_CASE("synthetic fields") {
  for (const auto& kind : synthetic_kinds()) {
    const SampledField f = synthetic_field(kind, 8, 2.0);
    const TargetPtr t = make_target(f.target);
    CAPTURE(kind);
    CHECK(f.samples.rows() == t->m());
    CHECK(static_cast<std::size_t>(f.samples.cols()) == f.count());
    int on_N = 0;
    for (Eigen::Index c = 0; c < f.samples.cols(); ++c) on_N += t->dist_to_N(f.samples.col(c)) < 1e-12;
    // The vortex centre is the one vertex off N.
    CHECK(on_N + (kind == "vortex") == f.samples.cols());
  }
  CHECK(smooth_field_tv() == doctest::Approx(4.59117).epsilon(1e-5));
  CHECK(synthetic_field("line", 5, 2.0).resolution.size() == 1);
  CHECK_THROWS_AS(synthetic_field("spiral", 4, 2.0), Error);

  // Crossing the cut left of A multiplies the quaternion lift by i.
  const TargetPtr q = make_target("so3_mod_v4");
  const Vec above = two_defect_lift(Vec2(-0.8, 0.014)), below = two_defect_lift(Vec2(-0.8, 0.012));
  CHECK(q->deck_name(q->deck_identify(below, above, 0.05)) == "i");
}
