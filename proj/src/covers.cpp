#include "liftbv/covers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace liftbv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

double wrap_angle(double a) { return a - kTwoPi * std::round(a / kTwoPi); }

// Distance from the origin to the nearest and farthest point of [lo, hi] in R^2.
std::pair<double, double> plane_box_radius(double x0, double x1, double y0, double y1) {
  const double cx = std::clamp(0.0, x0, x1), cy = std::clamp(0.0, y0, y1);
  const double fx = std::max(std::abs(x0), std::abs(x1)), fy = std::max(std::abs(y0), std::abs(y1));
  return {std::hypot(cx, cy), std::hypot(fx, fy)};
}

// Range of | |p| - r | as |p| ranges over [rmin, rmax].
std::pair<double, double> shell_range(double rmin, double rmax, double r) {
  const double lo = (r >= rmin && r <= rmax) ? 0.0 : std::min(std::abs(rmin - r), std::abs(rmax - r));
  return {lo, std::max(std::abs(rmin - r), std::abs(rmax - r))};
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(ErrorKind::InvalidArgument, "deck element: bad exponent '" + std::string(s) + "'");
  return v;
}

// ---------------------------------------------------------------------------

class Circle final : public CoverTarget {
 public:
  std::string id() const override { return "circle"; }
  int m() const override { return 2; }
  int ell() const override { return 1; }

  double dist_to_N(const Vec& z) const override { return std::abs(z.norm() - 1.0); }
  std::optional<Vec> nearest_N(const Vec& z) const override {
    const double r = z.norm();
    if (r < 1e-300) return std::nullopt;
    return Vec(z / r);
  }
  double singular_distance(const Vec& z) const override { return z.norm(); }
  std::optional<PolyChain> singular_set(double) const override {
    PolyChain X(2, 0);
    X.add(HPolytope::point(Vec::Zero(2)));
    return X;
  }
  double reach() const override { return 1.0; }
  double extent() const override { return 1.0; }
  double dist_N(const Vec& a, const Vec& b) const override {
    return std::abs(std::atan2(a(0) * b(1) - a(1) * b(0), a.dot(b)));
  }
  Vec geodesic_N(const Vec& a, const Vec& b, double s) const override {
    const double ta = std::atan2(a(1), a(0));
    const double t = ta + s * wrap_angle(std::atan2(b(1), b(0)) - ta);
    return Vec2(std::cos(t), std::sin(t));
  }
  std::pair<double, double> box_distance_range(const Vec& lo, const Vec& hi) const override {
    const auto [rmin, rmax] = plane_box_radius(lo(0), hi(0), lo(1), hi(1));
    return shell_range(rmin, rmax, 1.0);
  }
  Vec sample_N(std::mt19937_64& rng) const override {
    const double t = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    return Vec2(std::cos(t), std::sin(t));
  }
  Vec base_point() const override { return Vec2(1.0, 0.0); }

  bool on_E(const Vec& w, double) const override { return w.size() == 1 && std::isfinite(w(0)); }
  Vec project(const Vec& w) const override {
    if (!on_E(w, 0)) fail(ErrorKind::InvalidArgument, "cover_project: point not on the cover");
    return Vec2(std::cos(w(0)), std::sin(w(0)));
  }
  Vec any_lift(const Vec& z) const override { return Vec::Constant(1, std::atan2(z(1), z(0))); }
  double dist_E(const Vec& a, const Vec& b) const override { return std::abs(a(0) - b(0)); }
  Vec embed_E(const Vec& w) const override { return w; }
  Vec sample_E(std::mt19937_64& rng) const override {
    return Vec::Constant(1, std::uniform_real_distribution<double>(-100.0, 100.0)(rng));
  }
  double r_inj() const override { return kPi; }
  double kappa() const override { return 1.0; }
  double diam_E() const override { return std::numeric_limits<double>::infinity(); }

  bool deck_finite() const override { return false; }
  DeckElement deck_compose(const DeckElement& a, const DeckElement& b) const override {
    DeckElement r;
    r.shift[0] = a.shift[0] + b.shift[0];
    return r;
  }
  DeckElement deck_inverse(const DeckElement& a) const override {
    DeckElement r;
    r.shift[0] = -a.shift[0];
    return r;
  }
  Vec deck_apply(const DeckElement& a, const Vec& w) const override {
    return Vec::Constant(1, w(0) + kTwoPi * static_cast<double>(a.shift[0]));
  }
  std::vector<DeckElement> deck_window() const override {
    std::vector<DeckElement> out;
    for (long long k = -8; k <= 8; ++k) {
      DeckElement e;
      e.shift[0] = k;
      out.push_back(e);
    }
    return out;
  }
  std::string deck_name(const DeckElement& a) const override {
    const long long k = a.shift[0];
    if (k == 0) return "e";
    if (k == 1) return "t";
    return "t^" + std::to_string(k);
  }
  DeckElement deck_parse(std::string_view name) const override {
    DeckElement r;
    if (name == "e") return r;
    if (name == "t") r.shift[0] = 1;
    else if (name.substr(0, 2) == "t^") r.shift[0] = parse_int(name.substr(2));
    else fail(ErrorKind::InvalidArgument, "unknown deck element '" + std::string(name) + "'");
    return r;
  }
  DeckElement deck_identify(const Vec& w1, const Vec& w2, double tol) const override {
    const double k = std::round((w2(0) - w1(0)) / kTwoPi);
    if (std::abs(w1(0) + kTwoPi * k - w2(0)) > tol)
      fail(ErrorKind::NotSameFiber, "deck_identify: points lie in different fibers");
    DeckElement r;
    r.shift[0] = static_cast<long long>(k);
    return r;
  }
  DeckElement normalize_to_fundamental_domain(const Vec& w) const override {
    const double k = std::round(w(0) / kTwoPi);
    if (!std::isfinite(k) || std::abs(k) > 1e6)
      fail(ErrorKind::NormalizationFailure, "normalize_to_fundamental_domain: |k| exceeds 1e6");
    DeckElement r;
    r.shift[0] = static_cast<long long>(k);
    return r;
  }
  bool in_fundamental_domain(const Vec& w, double tol) const override { return std::abs(w(0)) <= kPi + tol; }

 protected:
  std::vector<Vec> fiber_near(const Vec& z, const Vec& w) const override {
    const double t = std::atan2(z(1), z(0));
    return {Vec::Constant(1, t + kTwoPi * std::round((w(0) - t) / kTwoPi))};
  }
};

// ---------------------------------------------------------------------------

class CliffordTorus final : public CoverTarget {
 public:
  std::string id() const override { return "clifford_torus"; }
  int m() const override { return 4; }
  int ell() const override { return 2; }

  double dist_to_N(const Vec& z) const override {
    return std::hypot(z.head<2>().norm() - kInvSqrt2, z.tail<2>().norm() - kInvSqrt2);
  }
  std::optional<Vec> nearest_N(const Vec& z) const override {
    const double r1 = z.head<2>().norm(), r2 = z.tail<2>().norm();
    if (r1 < 1e-300 || r2 < 1e-300) return std::nullopt;
    Vec p(4);
    p << z.head<2>() * (kInvSqrt2 / r1), z.tail<2>() * (kInvSqrt2 / r2);
    return p;
  }
  double singular_distance(const Vec& z) const override {
    return std::min(z.head<2>().norm(), z.tail<2>().norm());
  }
  std::optional<PolyChain> singular_set(double M) const override {
    PolyChain X(4, 2);
    for (int blk = 0; blk < 2; ++blk) {
      Vec lo = Vec::Constant(4, -M), hi = Vec::Constant(4, M);
      lo.segment<2>(2 * blk).setZero();
      hi.segment<2>(2 * blk).setZero();
      X.add(HPolytope::box(lo, hi), blk);
    }
    return X;
  }
  double reach() const override { return kInvSqrt2; }
  double extent() const override { return kInvSqrt2; }
  double dist_N(const Vec& a, const Vec& b) const override {
    const double d1 = angle(b, 0) - angle(a, 0), d2 = angle(b, 1) - angle(a, 1);
    return kInvSqrt2 * std::hypot(wrap_angle(d1), wrap_angle(d2));
  }
  Vec geodesic_N(const Vec& a, const Vec& b, double s) const override {
    Vec w(2);
    for (int k = 0; k < 2; ++k) w(k) = angle(a, k) + s * wrap_angle(angle(b, k) - angle(a, k));
    return project(w);
  }
  std::pair<double, double> box_distance_range(const Vec& lo, const Vec& hi) const override {
    const auto [a0, a1] = plane_box_radius(lo(0), hi(0), lo(1), hi(1));
    const auto [b0, b1] = plane_box_radius(lo(2), hi(2), lo(3), hi(3));
    const auto [p0, p1] = shell_range(a0, a1, kInvSqrt2);
    const auto [q0, q1] = shell_range(b0, b1, kInvSqrt2);
    return {std::hypot(p0, q0), std::hypot(p1, q1)};
  }
  Vec sample_N(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> U(-kPi, kPi);
    Vec w(2);
    w << U(rng), U(rng);
    return project(w);
  }
  Vec base_point() const override { return project(Vec::Zero(2)); }

  bool on_E(const Vec& w, double) const override { return w.size() == 2 && w.allFinite(); }
  Vec project(const Vec& w) const override {
    if (!on_E(w, 0)) fail(ErrorKind::InvalidArgument, "cover_project: point not on the cover");
    Vec z(4);
    z << std::cos(w(0)), std::sin(w(0)), std::cos(w(1)), std::sin(w(1));
    return kInvSqrt2 * z;
  }
  Vec any_lift(const Vec& z) const override { return Vec2(angle(z, 0), angle(z, 1)); }
  double dist_E(const Vec& a, const Vec& b) const override { return kInvSqrt2 * (a - b).norm(); }
  Vec embed_E(const Vec& w) const override { return kInvSqrt2 * w; }
  Vec sample_E(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> U(-100.0, 100.0);
    return Vec2(U(rng), U(rng));
  }
  double r_inj() const override { return kPi * kInvSqrt2; }
  double kappa() const override { return 1.0; }
  double diam_E() const override { return std::numeric_limits<double>::infinity(); }

  bool deck_finite() const override { return false; }
  DeckElement deck_compose(const DeckElement& a, const DeckElement& b) const override {
    DeckElement r;
    r.shift = {a.shift[0] + b.shift[0], a.shift[1] + b.shift[1]};
    return r;
  }
  DeckElement deck_inverse(const DeckElement& a) const override {
    DeckElement r;
    r.shift = {-a.shift[0], -a.shift[1]};
    return r;
  }
  Vec deck_apply(const DeckElement& a, const Vec& w) const override {
    return w + kTwoPi * Vec2(static_cast<double>(a.shift[0]), static_cast<double>(a.shift[1]));
  }
  std::vector<DeckElement> deck_window() const override {
    std::vector<DeckElement> out;
    for (long long i = -8; i <= 8; ++i)
      for (long long j = -8; j <= 8; ++j) {
        DeckElement e;
        e.shift = {i, j};
        out.push_back(e);
      }
    return out;
  }
  std::string deck_name(const DeckElement& a) const override {
    std::string out;
    for (int k = 0; k < 2; ++k) {
      const long long e = a.shift[static_cast<std::size_t>(k)];
      if (e == 0) continue;
      if (!out.empty()) out += '*';
      out += (k == 0) ? "a" : "b";
      if (e != 1) out += "^" + std::to_string(e);
    }
    return out.empty() ? "e" : out;
  }
  DeckElement deck_parse(std::string_view name) const override {
    DeckElement r;
    if (name == "e") return r;
    std::size_t pos = 0;
    while (pos < name.size()) {
      const std::size_t end = std::min(name.find('*', pos), name.size());
      const std::string_view tok = name.substr(pos, end - pos);
      if (tok.empty() || (tok[0] != 'a' && tok[0] != 'b'))
        fail(ErrorKind::InvalidArgument, "unknown deck element '" + std::string(name) + "'");
      long long e = 1;
      if (tok.size() > 1) {
        if (tok[1] != '^') fail(ErrorKind::InvalidArgument, "unknown deck element '" + std::string(name) + "'");
        e = parse_int(tok.substr(2));
      }
      r.shift[tok[0] == 'a' ? 0 : 1] += e;
      pos = end + 1;
    }
    return r;
  }
  DeckElement deck_identify(const Vec& w1, const Vec& w2, double tol) const override {
    const Vec k = ((w2 - w1) / kTwoPi).array().round();
    if (dist_E(w1 + kTwoPi * k, w2) > tol) fail(ErrorKind::NotSameFiber, "deck_identify: points lie in different fibers");
    DeckElement r;
    r.shift = {static_cast<long long>(k(0)), static_cast<long long>(k(1))};
    return r;
  }
  DeckElement normalize_to_fundamental_domain(const Vec& w) const override {
    const Vec k = (w / kTwoPi).array().round();
    if (!k.allFinite() || k.cwiseAbs().maxCoeff() > 1e6)
      fail(ErrorKind::NormalizationFailure, "normalize_to_fundamental_domain: |k| exceeds 1e6");
    DeckElement r;
    r.shift = {static_cast<long long>(k(0)), static_cast<long long>(k(1))};
    return r;
  }
  bool in_fundamental_domain(const Vec& w, double tol) const override {
    return w.cwiseAbs().maxCoeff() <= kPi + tol;
  }

 protected:
  std::vector<Vec> fiber_near(const Vec& z, const Vec& w) const override {
    Vec t = any_lift(z);
    for (int k = 0; k < 2; ++k) t(k) += kTwoPi * std::round((w(k) - t(k)) / kTwoPi);
    return {t};
  }

 private:
  static double angle(const Vec& z, int k) { return std::atan2(z(2 * k + 1), z(2 * k)); }
};

// ---------------------------------------------------------------------------

// Shared machinery for quotients of S^3 by a finite group acting on the left.
class QuaternionTarget : public CoverTarget {
 public:
  int ell() const override { return 4; }
  bool on_E(const Vec& w, double tol) const override {
    return w.size() == 4 && w.allFinite() && std::abs(w.norm() - 1.0) <= tol;
  }
  Vec project(const Vec& w) const override {
    if (!on_E(w, 1e-6)) fail(ErrorKind::InvalidArgument, "cover_project: point not on S^3");
    return embed_rotation(to_quat(w).normalized().toRotationMatrix());
  }
  double dist_E(const Vec& a, const Vec& b) const override {
    // atan2 form keeps full precision for nearby points.
    return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
  }
  Vec embed_E(const Vec& w) const override { return w; }
  Vec combine_E(const Vec& a, const Vec& b, double ca, double cb) const override {
    const Vec v = ca * a + cb * b;
    const double n = v.norm();
    return n > 1e-300 ? Vec(v / n) : a;
  }
  Vec sample_E(std::mt19937_64& rng) const override {
    std::normal_distribution<double> G;
    Vec v(4);
    for (int k = 0; k < 4; ++k) v(k) = G(rng);
    return v.normalized();
  }
  Vec sample_N(std::mt19937_64& rng) const override { return project(sample_E(rng)); }
  Vec base_point() const override { return project(from_quat(Eigen::Quaterniond::Identity())); }
  double kappa() const override { return 0.5 * kInvSqrt2; }
  double diam_E() const override { return kPi; }

  double dist_N(const Vec& a, const Vec& b) const override {
    const Eigen::Quaterniond qa = to_quat(any_lift(a)), qb = to_quat(any_lift(b));
    double best = -1.0;
    for (const auto& h : group_) best = std::max(best, std::abs(qa.coeffs().dot((h * qb).coeffs())));
    return std::acos(std::min(1.0, best));
  }
  Vec geodesic_N(const Vec& a, const Vec& b, double s) const override {
    const Vec wa = any_lift(a);
    const Vec wb = nearest(fiber(b), wa);
    return project(from_quat(to_quat(wa).slerp(s, to_quat(wb))));
  }

  bool deck_finite() const override { return true; }
  DeckElement deck_compose(const DeckElement& a, const DeckElement& b) const override {
    DeckElement r;
    r.q = a.q * b.q;
    return r;
  }
  DeckElement deck_inverse(const DeckElement& a) const override {
    DeckElement r;
    r.q = a.q.conjugate();
    return r;
  }
  Vec deck_apply(const DeckElement& a, const Vec& w) const override { return from_quat(a.q * to_quat(w)); }
  std::vector<DeckElement> deck_window() const override {
    std::vector<DeckElement> out;
    for (const auto& h : group_) {
      DeckElement e;
      e.q = h;
      out.push_back(e);
    }
    return out;
  }
  std::string deck_name(const DeckElement& a) const override {
    for (std::size_t k = 0; k < group_.size(); ++k)
      if (group_[k].coeffs() == a.q.coeffs()) return names_[k];
    fail(ErrorKind::InvalidArgument, "deck_name: element outside the deck group");
  }
  DeckElement deck_parse(std::string_view name) const override {
    for (std::size_t k = 0; k < names_.size(); ++k)
      if (names_[k] == name) {
        DeckElement e;
        e.q = group_[k];
        return e;
      }
    fail(ErrorKind::InvalidArgument, "unknown deck element '" + std::string(name) + "'");
  }
  DeckElement normalize_to_fundamental_domain(const Vec&) const override { return {}; }
  bool in_fundamental_domain(const Vec& w, double tol) const override { return on_E(w, std::max(tol, 1e-9)); }

 protected:
  QuaternionTarget(std::vector<Eigen::Quaterniond> group, std::vector<std::string> names)
      : group_(std::move(group)), names_(std::move(names)) {}

  virtual Vec embed_rotation(const Eigen::Matrix3d& R) const = 0;

  std::vector<Vec> fiber(const Vec& z) const {
    const Eigen::Quaterniond q0 = to_quat(any_lift(z));
    std::vector<Vec> out;
    for (const auto& h : group_) out.push_back(from_quat(h * q0));
    return out;
  }
  std::vector<Vec> fiber_near(const Vec& z, const Vec&) const override { return fiber(z); }
  Vec nearest(const std::vector<Vec>& cands, const Vec& w) const {
    return *std::min_element(cands.begin(), cands.end(),
                             [&](const Vec& a, const Vec& b) { return dist_E(a, w) < dist_E(b, w); });
  }

  std::vector<Eigen::Quaterniond> group_;
  std::vector<std::string> names_;
};

Eigen::Quaterniond quat(double w, double x, double y, double z) { return Eigen::Quaterniond(w, x, y, z); }

// SO(3) inside R^9 (row-major), double-covered by S^3.
class SO3 final : public QuaternionTarget {
 public:
  SO3() : QuaternionTarget({quat(1, 0, 0, 0), quat(-1, 0, 0, 0)}, {"1", "-1"}) {}

  std::string id() const override { return "so3"; }
  int m() const override { return 9; }

  double dist_to_N(const Vec& z) const override {
    const auto p = nearest_N(z);
    if (!p) return polar(z).second.norm();  // any point of the degenerate orbit is equidistant
    return (z - *p).norm();
  }
  std::optional<Vec> nearest_N(const Vec& z) const override {
    if (singular_distance(z) < 1e-14) return std::nullopt;
    return polar(z).first;
  }
  double singular_distance(const Vec& z) const override {
    const Eigen::Matrix3d Z = as_matrix(z);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d s = svd.singularValues();
    const double d = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    return (d > 0 ? s(1) + s(2) : s(1) - s(2)) * kInvSqrt2;
  }
  double reach() const override { return 1.0; }
  double extent() const override { return 1.0; }

  Vec any_lift(const Vec& z) const override {
    Eigen::Quaterniond q(as_matrix(z));
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    return from_quat(q);
  }
  double r_inj() const override { return kPi / 2; }

 protected:
  Vec embed_rotation(const Eigen::Matrix3d& R) const override {
    Vec z(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) z(3 * i + j) = R(i, j);
    return z;
  }

 private:
  static Eigen::Matrix3d as_matrix(const Vec& z) {
    Eigen::Matrix3d Z;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Z(i, j) = z(3 * i + j);
    return Z;
  }
  std::pair<Vec, Vec> polar(const Vec& z) const {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(as_matrix(z), Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() > 0 ? 1.0 : -1.0;
    const Eigen::Matrix3d R = svd.matrixU() * D * svd.matrixV().transpose();
    const Vec p = embed_rotation(R);
    return {p, z - p};
  }
};

// SO(3)/V4 as the isospectral orbit {R^T diag(-1,0,1) R} in Sym(3) = R^6,
// coordinates (Z00, Z11, Z22, sqrt2 Z01, sqrt2 Z02, sqrt2 Z12). The cover is
// S^3 with the quaternion group Q8 acting on the left.
class SO3ModV4 final : public QuaternionTarget {
 public:
  SO3ModV4()
      : QuaternionTarget({quat(1, 0, 0, 0), quat(-1, 0, 0, 0), quat(0, 1, 0, 0), quat(0, -1, 0, 0), quat(0, 0, 1, 0),
                          quat(0, 0, -1, 0), quat(0, 0, 0, 1), quat(0, 0, 0, -1)},
                         {"1", "-1", "i", "-i", "j", "-j", "k", "-k"}) {}

  std::string id() const override { return "so3_mod_v4"; }
  int m() const override { return 6; }

  double dist_to_N(const Vec& z) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(as_matrix(z));
    return (es.eigenvalues() - Eigen::Vector3d(-1, 0, 1)).norm();
  }
  std::optional<Vec> nearest_N(const Vec& z) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(as_matrix(z));
    const Eigen::Vector3d mu = es.eigenvalues();
    if (std::min(mu(1) - mu(0), mu(2) - mu(1)) < 1e-14) return std::nullopt;
    const Eigen::Matrix3d Q = es.eigenvectors();
    return to_coords(Q * Eigen::Vector3d(-1, 0, 1).asDiagonal() * Q.transpose());
  }
  double singular_distance(const Vec& z) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(as_matrix(z), Eigen::EigenvaluesOnly);
    const Eigen::Vector3d mu = es.eigenvalues();
    return std::min(mu(1) - mu(0), mu(2) - mu(1)) * kInvSqrt2;
  }
  double reach() const override { return kInvSqrt2; }
  double extent() const override { return 1.0; }

  Vec any_lift(const Vec& z) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(as_matrix(z));
    Eigen::Matrix3d R = es.eigenvectors().transpose();
    if (R.determinant() < 0) R.row(2) *= -1.0;
    const Eigen::Quaterniond q0(R);
    // Canonical orbit representative: lexicographically largest coefficients.
    Vec best;
    for (const auto& h : group_) {
      const Vec c = from_quat(h * q0.normalized());
      if (best.size() == 0 || std::lexicographical_compare(best.data(), best.data() + 4, c.data(), c.data() + 4))
        best = c;
    }
    return best;
  }
  double r_inj() const override { return kPi / 4; }

 protected:
  Vec embed_rotation(const Eigen::Matrix3d& R) const override {
    return to_coords(R.transpose() * Eigen::Vector3d(-1, 0, 1).asDiagonal() * R);
  }

 private:
  static Eigen::Matrix3d as_matrix(const Vec& z) {
    const double r = kInvSqrt2;
    Eigen::Matrix3d Z;
    Z << z(0), r * z(3), r * z(4), r * z(3), z(1), r * z(5), r * z(4), r * z(5), z(2);
    return Z;
  }
  static Vec to_coords(const Eigen::Matrix3d& Z) {
    const double s = std::sqrt(2.0);
    Vec z(6);
    z << Z(0, 0), Z(1, 1), Z(2, 2), s * Z(0, 1), s * Z(0, 2), s * Z(1, 2);
    return z;
  }
};

}  // namespace

std::pair<double, double> CoverTarget::box_distance_range(const Vec&, const Vec&) const {
  fail(ErrorKind::InvalidArgument, "box_distance_range: not available for target " + id());
}

Vec CoverTarget::lift_step(const Vec& w, const Vec& z_next) const {
  if (!on_E(w, 1e-6)) fail(ErrorKind::InvalidArgument, "lift_step: w is not on the cover");
  const std::vector<Vec> cands = fiber_near(z_next, w);
  const Vec* best = nullptr;
  double bd = std::numeric_limits<double>::infinity();
  for (const Vec& c : cands) {
    const double d = dist_E(c, w);
    if (d < bd) bd = d, best = &c;
  }
  if (!(bd < r_inj() - 1e-12)) fail(ErrorKind::StepTooLarge, "lift_step: step reaches the injectivity radius");
  return *best;
}

DeckElement CoverTarget::deck_identify(const Vec& w1, const Vec& w2, double tol) const {
  for (const DeckElement& a : deck_window())
    if (dist_E(deck_apply(a, w1), w2) <= tol) return a;
  fail(ErrorKind::NotSameFiber, "deck_identify: points lie in different fibers");
}

TargetPtr make_target(std::string_view id) {
  static const TargetPtr circle = std::make_shared<Circle>();
  static const TargetPtr torus = std::make_shared<CliffordTorus>();
  static const TargetPtr so3 = std::make_shared<SO3>();
  static const TargetPtr v4 = std::make_shared<SO3ModV4>();
  if (id == "circle") return circle;
  if (id == "clifford_torus" || id == "torus") return torus;
  if (id == "so3") return so3;
  if (id == "so3_mod_v4") return v4;
  fail(ErrorKind::InvalidArgument, "unknown target '" + std::string(id) + "'");
}

std::vector<std::string> target_ids() { return {"circle", "clifford_torus", "so3", "so3_mod_v4"}; }

}  // namespace liftbv
