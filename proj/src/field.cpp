#include "liftbv/field.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "json.hpp"

namespace liftbv {

namespace {

[[noreturn]] void ingest_fail(std::size_t line, const std::string& what) {
  fail(ErrorKind::IngestError, "line " + std::to_string(line) + ": " + what);
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Vec json_vec(const nlohmann::json& j, std::size_t line, const char* what) {
  if (!j.is_array() || j.empty()) ingest_fail(line, std::string("header field '") + what + "' must be a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) ingest_fail(line, std::string("header field '") + what + "' must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::size_t SampledField::count() const {
  std::size_t n = 1;
  for (int r : resolution) n *= static_cast<std::size_t>(r + 1);
  return n;
}

int clamp_samples(Mat& samples, double lambda) {
  int moved = 0;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    const auto col = samples.col(c);
    if (col.cwiseAbs().maxCoeff() > lambda) {
      samples.col(c) = col.cwiseMax(-lambda).cwiseMin(lambda);
      ++moved;
    }
  }
  return moved;
}

SampledField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) ingest_fail(1, "missing header");
  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    ingest_fail(1, std::string("header is not JSON: ") + e.what());
  }
  SampledField f;
  try {
    if (hdr.value("version", 0) != 1) ingest_fail(1, "unsupported version");
    f.target = hdr.at("target").get<std::string>();
    f.lo = json_vec(hdr.at("box").at("lo"), 1, "box.lo");
    f.hi = json_vec(hdr.at("box").at("hi"), 1, "box.hi");
    for (const auto& r : hdr.at("resolution")) f.resolution.push_back(r.get<int>());
    f.lambda = hdr.at("lambda").get<double>();
  } catch (const nlohmann::json::exception& e) {
    ingest_fail(1, std::string("bad header: ") + e.what());
  }
  TargetPtr t;
  try {
    t = make_target(f.target);
  } catch (const Error&) {
    ingest_fail(1, "unknown target '" + f.target + "'");
  }
  const int d = static_cast<int>(f.resolution.size());
  if (d < 1 || f.lo.size() != d || f.hi.size() != d) ingest_fail(1, "box and resolution dimensions differ");
  for (int k = 0; k < d; ++k) {
    if (f.resolution[static_cast<std::size_t>(k)] < 1) ingest_fail(1, "resolution must be positive");
    if (!(f.lo(k) < f.hi(k))) ingest_fail(1, "box must have lo < hi");
  }
  if (!(f.lambda > 0) || !std::isfinite(f.lambda)) ingest_fail(1, "lambda must be positive and finite");

  const int m = t->m();
  const std::size_t n = f.count();
  f.samples.resize(m, static_cast<Eigen::Index>(n));
  std::size_t lineno = 1, row = 0;
  while (row < n && std::getline(is, line)) {
    ++lineno;
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip = [&] {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    };
    skip();
    if (p == end) continue;
    for (int k = 0; k < m; ++k) {
      skip();
      double v;
      const auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc() || (r.ptr < end && *r.ptr != ' ' && *r.ptr != '\t' && *r.ptr != '\r')) {
        // from_chars does not accept "nan"/"inf" spellings everywhere; report them uniformly.
        ingest_fail(lineno, "expected " + std::to_string(m) + " numbers at offset " + std::to_string(p - line.data()));
      }
      if (!std::isfinite(v)) ingest_fail(lineno, "non-finite sample at offset " + std::to_string(p - line.data()));
      f.samples(k, static_cast<Eigen::Index>(row)) = v;
      p = r.ptr;
    }
    skip();
    if (p != end) ingest_fail(lineno, "trailing data at offset " + std::to_string(p - line.data()));
    ++row;
  }
  if (row < n) ingest_fail(lineno, "expected " + std::to_string(n) + " sample rows, found " + std::to_string(row));
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) ingest_fail(lineno, "unexpected data after the samples");
  }
  f.clamped = clamp_samples(f.samples, f.lambda);
  return f;
}

SampledField read_field_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IngestError, "cannot open '" + path + "'");
  return read_field(is);
}

void write_field(const SampledField& f, std::ostream& os) {
  nlohmann::json hdr = {{"version", 1},
                        {"target", f.target},
                        {"box",
                         {{"lo", std::vector<double>(f.lo.data(), f.lo.data() + f.lo.size())},
                          {"hi", std::vector<double>(f.hi.data(), f.hi.data() + f.hi.size())}}},
                        {"resolution", f.resolution},
                        {"lambda", f.lambda}};
  os << hdr.dump() << '\n';
  for (Eigen::Index c = 0; c < f.samples.cols(); ++c) {
    for (Eigen::Index k = 0; k < f.samples.rows(); ++k) os << (k ? " " : "") << shortest(f.samples(k, c));
    os << '\n';
  }
}

void write_field_file(const SampledField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IngestError, "cannot write '" + path + "'");
  write_field(f, os);
}

Interpolation interpolate_pa(const SampledField& f) {
  Triangulation tri = kuhn_triangulate(f.lo, f.hi, f.resolution);
  Interpolation out{PiecewiseAffineMap(std::move(tri), f.samples), 0.0, 0.0};
  out.total_variation = out.map.total_variation();
  const Triangulation& T = out.map.triangulation();
  for (std::size_t v = 0; v < T.num_vertices(); ++v)
    out.vertex_residual = std::max(
        out.vertex_residual,
        (out.map.eval(T.vertex(static_cast<int>(v))) - f.samples.col(static_cast<Eigen::Index>(v))).norm());
  return out;
}

Vec two_defect_A() { return Vec2(-0.47, 0.013); }
Vec two_defect_B() { return Vec2(0.53, 0.013); }

Vec two_defect_lift(const Vec& x) {
  const Vec A = two_defect_A(), B = two_defect_B();
  const double ta = std::atan2(x(1) - A(1), x(0) - A(0));
  double tb = std::atan2(x(1) - B(1), x(0) - B(0));
  if (tb < 0) tb += 2 * std::numbers::pi;
  const Eigen::Quaterniond qa(std::cos(ta / 4), std::sin(ta / 4), 0, 0);
  const Eigen::Quaterniond qb(std::cos(tb / 4), 0, std::sin(tb / 4), 0);
  return from_quat(qa * qb);
}

double smooth_field_tv() { return 2 * (std::sqrt(2.0) + std::asinh(1.0)); }

std::vector<std::string> synthetic_kinds() { return {"vortex", "smooth", "constant", "two_defect", "line"}; }

SampledField synthetic_field(const std::string& kind, int resolution, double lambda) {
  if (resolution < 1) fail(ErrorKind::InvalidArgument, "synthetic_field: resolution must be positive");
  SampledField f;
  f.lambda = lambda;
  const int d = kind == "line" ? 1 : 2;
  f.lo = Vec::Constant(d, -1.0);
  f.hi = Vec::Constant(d, 1.0);
  f.resolution.assign(static_cast<std::size_t>(d), resolution);
  f.target = kind == "two_defect" ? "so3_mod_v4" : "circle";
  const TargetPtr t = make_target(f.target);
  const Triangulation tri = kuhn_triangulate(f.lo, f.hi, f.resolution);
  f.samples.resize(t->m(), static_cast<Eigen::Index>(tri.num_vertices()));
  for (std::size_t v = 0; v < tri.num_vertices(); ++v) {
    const Vec x = tri.vertex(static_cast<int>(v));
    Vec val;
    if (kind == "vortex") {
      val = x.norm() < 1e-14 ? Vec(Vec2(0, 0)) : Vec(x.normalized());
    } else if (kind == "smooth") {
      const double phi = x(0) + 0.5 * x(1) * x(1);
      val = Vec2(std::cos(phi), std::sin(phi));
    } else if (kind == "constant") {
      val = Vec2(0.6, 0.8);
    } else if (kind == "two_defect") {
      val = t->project(two_defect_lift(x));
    } else if (kind == "line") {
      const double phi = 2.5 * x(0);
      val = Vec2(std::cos(phi), std::sin(phi));
    } else {
      fail(ErrorKind::InvalidArgument, "unknown synthetic field '" + kind + "'");
    }
    f.samples.col(static_cast<Eigen::Index>(v)) = val;
  }
  f.clamped = clamp_samples(f.samples, lambda);
  return f;
}

}  // namespace liftbv
