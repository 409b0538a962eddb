#include "liftbv/scaffold.hpp"

#include "json.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace liftbv {

namespace {

thread_local int g_lookups = 0;

constexpr const char* kMagic = "LIFTBV-SCAFFOLD 1";

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

int GridFace::dim() const {
  return static_cast<int>(std::count(fixed.begin(), fixed.end(), false));
}

int Scaffold::last_lookup_count() { return g_lookups; }

std::int64_t Scaffold::cube_index(const std::vector<int>& cell) const {
  std::int64_t idx = 0, stride = 1;
  for (int k = 0; k < m(); ++k) {
    idx += cell[static_cast<std::size_t>(k)] * stride;
    stride *= cells_per_axis();
  }
  return idx;
}

std::vector<int> Scaffold::cube_cell(std::int64_t c) const {
  std::vector<int> cell(static_cast<std::size_t>(m()));
  for (int k = 0; k < m(); ++k) {
    cell[static_cast<std::size_t>(k)] = static_cast<int>(c % cells_per_axis());
    c /= cells_per_axis();
  }
  return cell;
}

std::vector<std::int64_t> Scaffold::W() const {
  std::vector<std::int64_t> out;
  for (std::size_t c = 0; c < in_w_.size(); ++c)
    if (in_w_[c]) out.push_back(static_cast<std::int64_t>(c));
  return out;
}

bool Scaffold::face_in_W(const GridFace& f) const {
  const int n = cells_per_axis();
  // Enumerate the (up to 2^fixed) cubes sharing this face.
  std::vector<int> fixed_axes;
  for (int k = 0; k < m(); ++k)
    if (f.fixed[static_cast<std::size_t>(k)]) fixed_axes.push_back(k);
  std::vector<int> cell = f.index;
  for (std::uint32_t mask = 0; mask < (1u << fixed_axes.size()); ++mask) {
    bool valid = true;
    for (std::size_t t = 0; t < fixed_axes.size(); ++t) {
      const auto k = static_cast<std::size_t>(fixed_axes[t]);
      cell[k] = f.index[k] - ((mask >> t) & 1u ? 1 : 0);
      valid = valid && cell[k] >= 0 && cell[k] < n;
    }
    if (valid && in_w_[static_cast<std::size_t>(cube_index(cell))]) return true;
  }
  return false;
}

GridFace Scaffold::locate_face(const Vec& z) const {
  const int n = cells_per_axis();
  const double h = cell_size();
  GridFace f;
  f.index.resize(static_cast<std::size_t>(m()));
  f.fixed.resize(static_cast<std::size_t>(m()));
  for (int k = 0; k < m(); ++k) {
    const double s = std::clamp((z(k) + M_) / h, 0.0, static_cast<double>(n));
    const double r = std::round(s);
    const auto uk = static_cast<std::size_t>(k);
    if (std::abs(s - r) <= 1e-11) {
      f.fixed[uk] = true;
      f.index[uk] = static_cast<int>(r);
    } else {
      f.fixed[uk] = false;
      f.index[uk] = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
    }
  }
  return f;
}

Vec Scaffold::vertex_value(const std::vector<int>& grid) const {
  Vec p(m());
  for (int k = 0; k < m(); ++k) p(k) = -M_ + grid[static_cast<std::size_t>(k)] * cell_size();
  const auto n = target_->nearest_N(p);
  return n ? *n : target_->base_point();
}

Vec Scaffold::edge_value(const GridFace& f, const Vec& z) const {
  std::vector<int> g = f.index;
  if (f.dim() == 0) return vertex_value(g);
  const auto a = static_cast<std::size_t>(std::find(f.fixed.begin(), f.fixed.end(), false) - f.fixed.begin());
  const double s = (z(static_cast<Eigen::Index>(a)) - (-M_ + f.index[a] * cell_size())) / cell_size();
  const Vec v0 = vertex_value(g);
  g[a] += 1;
  const Vec v1 = vertex_value(g);
  return target_->geodesic_N(v0, v1, std::clamp(s, 0.0, 1.0));
}

Vec Scaffold::cascade(int j, const Vec& z) const {
  if (kind_ != ScaffoldKind::GenericGrid) fail(ErrorKind::InvalidArgument, "cascade: analytic scaffolds have no grid");
  if (z.size() != m()) fail(ErrorKind::InvalidArgument, "cascade: dimension mismatch");
  if (z.cwiseAbs().maxCoeff() > M_ * (1 + 1e-12)) fail(ErrorKind::InvalidArgument, "cascade: point outside the cube");
  GridFace f = locate_face(z);
  if (f.dim() > j) fail(ErrorKind::InvalidArgument, "cascade: point is not on the j-skeleton");
  const double h = cell_size(), half = 0.5 * h;
  Vec x = z;
  g_lookups = 0;
  while (true) {
    ++g_lookups;
    if (face_in_W(f) || f.dim() <= 1) return x;
    double t = 0.0;
    for (int k = 0; k < m(); ++k)
      if (!f.fixed[static_cast<std::size_t>(k)])
        t = std::max(t, std::abs(x(k) - (-M_ + (f.index[static_cast<std::size_t>(k)] + 0.5) * h)) / half);
    if (t <= 1e-14) fail(ErrorKind::SingularPoint, "cascade: point is a dual-grid centre");
    for (int k = 0; k < m(); ++k) {
      const auto uk = static_cast<std::size_t>(k);
      if (f.fixed[uk]) continue;
      const double c = -M_ + (f.index[uk] + 0.5) * h;
      const double v = (x(k) - c) / t;
      if (std::abs(v) >= half * (1 - 1e-12)) {
        f.fixed[uk] = true;
        if (v > 0) f.index[uk] += 1;
        x(k) = -M_ + f.index[uk] * h;
      } else {
        x(k) = c + v;
      }
    }
  }
}

Vec Scaffold::rho(const Vec& z) const {
  if (kind_ == ScaffoldKind::Analytic) {
    const auto p = target_->nearest_N(z);
    if (!p) fail(ErrorKind::SingularPoint, "rho: point lies on the singular set");
    return *p;
  }
  const Vec x = cascade(m(), z);
  const GridFace f = locate_face(x);
  if (face_in_W(f)) {
    const auto p = target_->nearest_N(x);
    if (!p) fail(ErrorKind::ProjectionFailure, "rho: tubular projection failed inside W");
    return *p;
  }
  return edge_value(f, x);
}

double Scaffold::piece_distance(const DualPiece& p, const Vec& z) const {
  const std::vector<int> cell = cube_cell(p.cube);
  const double h = cell_size();
  double d2 = 0.0;
  for (int k = 0; k < m(); ++k) {
    const double c = -M_ + (cell[static_cast<std::size_t>(k)] + 0.5) * h;
    if (k == p.a || k == p.b) {
      d2 += (z(k) - c) * (z(k) - c);
      continue;
    }
    const bool up = (p.sides >> k) & 1u;
    const double lo = up ? c : c - 0.5 * h, hi = up ? c + 0.5 * h : c;
    const double e = z(k) < lo ? lo - z(k) : (z(k) > hi ? z(k) - hi : 0.0);
    d2 += e * e;
  }
  return std::sqrt(d2);
}

HPolytope Scaffold::piece_polytope(const DualPiece& p) const {
  const std::vector<int> cell = cube_cell(p.cube);
  const double h = cell_size();
  Vec lo(m()), hi(m());
  for (int k = 0; k < m(); ++k) {
    const double c = -M_ + (cell[static_cast<std::size_t>(k)] + 0.5) * h;
    if (k == p.a || k == p.b) {
      lo(k) = hi(k) = c;
    } else if ((p.sides >> k) & 1u) {
      lo(k) = c, hi(k) = c + 0.5 * h;
    } else {
      lo(k) = c - 0.5 * h, hi(k) = c;
    }
  }
  return HPolytope::box(lo, hi);
}

void Scaffold::rebuild_pieces() {
  pieces_.clear();
  const int mm = m();
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(in_w_.size()); ++c) {
    if (in_w_[static_cast<std::size_t>(c)]) continue;
    const std::vector<int> cell = cube_cell(c);
    for (int a = 0; a < mm; ++a)
      for (int b = a + 1; b < mm; ++b)
        for (std::uint32_t sides = 0; sides < (1u << mm); ++sides) {
          if (((sides >> a) & 1u) || ((sides >> b) & 1u)) continue;
          GridFace g;
          g.index = cell;
          g.fixed.assign(static_cast<std::size_t>(mm), true);
          g.fixed[static_cast<std::size_t>(a)] = g.fixed[static_cast<std::size_t>(b)] = false;
          for (int k = 0; k < mm; ++k)
            if (k != a && k != b && ((sides >> k) & 1u)) g.index[static_cast<std::size_t>(k)] += 1;
          if (!face_in_W(g)) pieces_.push_back({c, a, b, sides});
        }
  }
}

double Scaffold::dist_to_X(const Vec& z) const {
  if (kind_ == ScaffoldKind::Analytic) return target_->singular_distance(z);
  const int n = cells_per_axis();
  const double h = cell_size();
  std::vector<int> base(static_cast<std::size_t>(m()));
  for (int k = 0; k < m(); ++k)
    base[static_cast<std::size_t>(k)] = std::clamp(static_cast<int>(std::floor((z(k) + M_) / h)), 0, n - 1);
  double best = std::numeric_limits<double>::infinity();
  const std::int64_t nb = ipow(3, m());
  std::vector<int> cell(base.size());
  for (std::int64_t code = 0; code < nb; ++code) {
    std::int64_t r = code;
    bool valid = true;
    for (std::size_t k = 0; k < base.size(); ++k) {
      cell[k] = base[k] + static_cast<int>(r % 3) - 1;
      r /= 3;
      valid = valid && cell[k] >= 0 && cell[k] < n;
    }
    if (!valid) continue;
    const std::int64_t c = cube_index(cell);
    if (in_w_[static_cast<std::size_t>(c)]) continue;
    const auto lo = std::lower_bound(pieces_.begin(), pieces_.end(), c,
                                     [](const DualPiece& p, std::int64_t v) { return p.cube < v; });
    for (auto it = lo; it != pieces_.end() && it->cube == c; ++it) best = std::min(best, piece_distance(*it, z));
  }
  if (std::isfinite(best)) return best;
  // Nothing in the neighbour ring: the true distance is at least h, so scan everything.
  for (const DualPiece& p : pieces_) best = std::min(best, piece_distance(p, z));
  return best;
}

std::vector<std::size_t> Scaffold::X_near(const Vec& lo, const Vec& hi) const {
  std::vector<std::size_t> out;
  if (!X_) return out;
  if (kind_ == ScaffoldKind::Analytic) {
    for (std::size_t i = 0; i < X_->size(); ++i) out.push_back(i);
    return out;
  }
  const int n = cells_per_axis();
  const double h = cell_size();
  std::vector<int> first(static_cast<std::size_t>(m())), last(first.size());
  for (int k = 0; k < m(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    first[uk] = std::clamp(static_cast<int>(std::floor((lo(k) + M_) / h - 1e-9)), 0, n - 1);
    last[uk] = std::clamp(static_cast<int>(std::floor((hi(k) + M_) / h + 1e-9)), 0, n - 1);
    if (hi(k) < -M_ || lo(k) > M_) return out;
  }
  std::vector<int> cell = first;
  while (true) {
    const std::int64_t c = cube_index(cell);
    if (!in_w_[static_cast<std::size_t>(c)]) {
      auto it = std::lower_bound(pieces_.begin(), pieces_.end(), c,
                                 [](const DualPiece& p, std::int64_t v) { return p.cube < v; });
      for (; it != pieces_.end() && it->cube == c; ++it) out.push_back(static_cast<std::size_t>(it - pieces_.begin()));
    }
    int k = 0;
    for (; k < m(); ++k) {
      const auto uk = static_cast<std::size_t>(k);
      if (++cell[uk] <= last[uk]) break;
      cell[uk] = first[uk];
    }
    if (k == m()) break;
  }
  return out;
}

Scaffold build_generic_scaffold(TargetPtr target, int q, double M, double sigma) {
  if (!target) fail(ErrorKind::InvalidArgument, "build_generic_scaffold: null target");
  const int m = target->m();
  if (m > 4) fail(ErrorKind::InvalidArgument, "build_generic_scaffold: grid construction needs m <= 4");
  if (q < 1 || !(M > 0)) fail(ErrorKind::InvalidArgument, "build_generic_scaffold: need q >= 1 and M > 0");
  if (sigma <= 0) sigma = M / (8.0 * q);
  if (!(target->extent() < M - sigma))
    fail(ErrorKind::InvalidArgument, "build_generic_scaffold: N must lie inside [-(M - sigma), M - sigma]^m");
  const std::int64_t ncubes = ipow(2 * q, m);
  if (ncubes > (std::int64_t{1} << 22)) fail(ErrorKind::InvalidArgument, "build_generic_scaffold: grid too fine");

  Scaffold s;
  s.kind_ = ScaffoldKind::GenericGrid;
  s.target_ = std::move(target);
  s.M_ = M;
  s.sigma_ = sigma;
  s.q_ = q;
  s.in_w_.assign(static_cast<std::size_t>(ncubes), 0);
  const double h = s.cell_size();
  for (std::int64_t c = 0; c < ncubes; ++c) {
    const std::vector<int> cell = s.cube_cell(c);
    Vec lo(m), hi(m);
    for (int k = 0; k < m; ++k) {
      lo(k) = -M + cell[static_cast<std::size_t>(k)] * h;
      hi(k) = lo(k) + h;
    }
    const auto [dmin, dmax] = s.target_->box_distance_range(lo, hi);
    if (dmin > sigma) continue;
    if (!(dmax < s.target_->reach()))
      fail(ErrorKind::ConstructionFailure, "build_generic_scaffold: cube " + std::to_string(c) +
                                               " of W leaves the tubular neighbourhood (q too small)");
    s.in_w_[static_cast<std::size_t>(c)] = 1;
  }
  s.rebuild_pieces();
  PolyChain X(m, m - 2);
  for (const DualPiece& p : s.pieces_) X.add(s.piece_polytope(p), static_cast<int>(p.cube));
  s.X_ = std::move(X);
  return s;
}

Scaffold build_analytic_scaffold(TargetPtr target, double M, double sigma) {
  if (!target) fail(ErrorKind::InvalidArgument, "build_analytic_scaffold: null target");
  if (!(sigma > 0) || !(sigma < target->reach()))
    fail(ErrorKind::InvalidArgument, "build_analytic_scaffold: need 0 < sigma < reach");
  if (!(target->extent() < M - sigma))
    fail(ErrorKind::InvalidArgument, "build_analytic_scaffold: N must lie inside [-(M - sigma), M - sigma]^m");
  Scaffold s;
  s.kind_ = ScaffoldKind::Analytic;
  s.target_ = std::move(target);
  s.M_ = M;
  s.sigma_ = sigma;
  s.q_ = 0;
  s.X_ = s.target_->singular_set(M);
  return s;
}

Vec radial_retract(const Vec& lo, const Vec& hi, const Vec& z) {
  const Vec c = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const double t = ((z - c).cwiseAbs().array() / half.array()).maxCoeff();
  if (t <= 1e-14) fail(ErrorKind::SingularPoint, "radial_retract: point is the centre");
  if (t > 1 + 1e-12) fail(ErrorKind::InvalidArgument, "radial_retract: point outside the face");
  return c + (z - c) / t;
}

Vec cascade_retract(const Scaffold& s, int j, const Vec& z) { return s.cascade(j, z); }

Vec eval_retraction(const Scaffold& s, const Vec& y, const Vec& z) {
  if (y.size() != s.m() || z.size() != s.m()) fail(ErrorKind::InvalidArgument, "eval_retraction: dimension mismatch");
  if (!(y.norm() < s.sigma())) fail(ErrorKind::InvalidArgument, "eval_retraction: shift outside the sigma-ball");
  if (z.cwiseAbs().maxCoeff() > s.Lambda() + kGeoEps)
    fail(ErrorKind::InvalidArgument, "eval_retraction: point outside [-Lambda, Lambda]^m");
  return retract_shifted(s, y, z);
}

Vec retract_shifted(const Scaffold& s, const Vec& y, const Vec& z) {
  const CoverTarget& t = s.target();
  const Vec zy = z - y;
  if (s.dist_to_X(zy) <= kGeoEps) fail(ErrorKind::NearSingular, "eval_retraction: point on the shifted singular set");
  Vec p;
  try {
    p = s.rho(zy);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularPoint) fail(ErrorKind::NearSingular, e.what());
    throw;
  }
  if (y.squaredNorm() == 0.0) return p;
  // Invert n -> rho(n - y) on N by damped fixed-point iteration.
  Vec n = p;
  for (int it = 0; it < 100; ++it) {
    const Vec res = p - s.rho(n - y);
    if (res.norm() <= 1e-10) return n;
    const auto next = t.nearest_N(n + res);
    if (!next) break;
    n = *next;
  }
  fail(ErrorKind::ProjectionFailure, "eval_retraction: correction on N did not converge");
}

double segment_image_length(const Scaffold& s, const Vec& a, const Vec& b, double tol) {
  // Bisect a piece while the midpoint adds more than its share of tol.
  struct Piece {
    double s0, s1;
    Vec r0, r1;
  };
  const double len = (b - a).norm();
  if (len == 0.0) return 0.0;
  auto at = [&](double t) { return s.rho(a + (b - a) * t); };
  std::vector<Piece> stack{{0.0, 1.0, at(0.0), at(1.0)}};
  double L = 0.0;
  while (!stack.empty()) {
    Piece p = std::move(stack.back());
    stack.pop_back();
    const double mid = 0.5 * (p.s0 + p.s1);
    const Vec rm = at(mid);
    const double chord = (p.r1 - p.r0).norm();
    const double split = (rm - p.r0).norm() + (p.r1 - rm).norm();
    if ((split - chord <= tol * (p.s1 - p.s0) && p.s1 - p.s0 <= 1.0 / 16) || (p.s1 - p.s0) * len < 1e-10) {
      L += split;
      continue;
    }
    stack.push_back({mid, p.s1, rm, p.r1});
    stack.push_back({p.s0, mid, p.r0, rm});
  }
  return L;
}

namespace {

// Compass search for a local maximum of f, started from x.
double polish_max(const std::function<double(const Vec&)>& f, Vec x, double step, double min_step, double box,
                  int budget) {
  double best = f(x);
  while (step >= min_step && budget > 0) {
    bool moved = false;
    for (Eigen::Index k = 0; k < x.size() && budget > 0; ++k)
      for (double dir : {1.0, -1.0}) {
        Vec c = x;
        c(k) = std::clamp(c(k) + dir * step, -box, box);
        --budget;
        double v = 0.0;
        try {
          v = f(c);
        } catch (const Error&) {
          continue;
        }
        if (v > best) {
          best = v, x = c, moved = true;
          break;
        }
      }
    if (!moved) step *= 0.5;
  }
  return best;
}

// Sup of f over `count` random draws, then polished from the best few.
double sampled_sup(const std::function<double(const Vec&)>& f, const std::vector<Vec>& draws, std::size_t count,
                   double step, double box) {
  std::vector<std::pair<double, std::size_t>> vals;
  for (std::size_t i = 0; i < count; ++i) {
    try {
      vals.emplace_back(f(draws[i]), i);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPoint && e.kind() != ErrorKind::NearSingular) throw;
    }
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  double best = vals.empty() ? 0.0 : vals.front().first;
  for (std::size_t k = 0; k < std::min<std::size_t>(6, vals.size()); ++k)
    best = std::max(best, polish_max(f, draws[vals[k].second], step, step * 1e-3, box, 400));
  return best;
}

}  // namespace

AuditReport audit_scaffold(const Scaffold& s, int samples, std::uint64_t seed) {
  if (samples < 1) fail(ErrorKind::InvalidArgument, "audit_scaffold: samples must be positive");
  const CoverTarget& t = s.target();
  const int m = s.m();
  AuditReport r;
  std::mt19937_64 rng(seed);

  for (int i = 0; i < samples; ++i) {
    const Vec z = t.sample_N(rng);
    r.identity_residual = std::max(r.identity_residual, (s.rho(z) - z).norm());
  }

  const double inner = s.M() * (1 - 1e-6);
  std::uniform_real_distribution<double> U(-inner, inner);
  const auto n = static_cast<std::size_t>(samples);
  std::vector<Vec> points(2 * n), segs(2 * n);
  for (auto& z : points) {
    z.resize(m);
    for (int k = 0; k < m; ++k) z(k) = U(rng);
  }
  for (auto& z : segs) {
    z.resize(2 * m);
    for (int k = 0; k < 2 * m; ++k) z(k) = U(rng);
  }
  const double step = 0.05 * s.M();

  // (b) |grad rho| * dist(., X) by central differences.
  const double fd = 1e-6;
  auto grad_stat = [&](const Vec& z) -> double {
    const double d = s.dist_to_X(z);
    if (d < 1e-4) return 0.0;
    double g2 = 0.0;
    for (int k = 0; k < m; ++k) {
      Vec zp = z, zm = z;
      zp(k) += fd;
      zm(k) -= fd;
      g2 += ((s.rho(zp) - s.rho(zm)) / (2 * fd)).squaredNorm();
    }
    return std::sqrt(g2) * d;
  };
  r.C0_estimate = sampled_sup(grad_stat, points, n, step, inner);
  r.C0_refined = std::max(r.C0_estimate, sampled_sup(grad_stat, points, 2 * n, step, inner));
  r.C0_stable = std::isfinite(r.C0_refined) && r.C0_refined <= 1.05 * r.C0_estimate;

  // (c) arclength of rho along random segments.
  auto seg_stat = [&](double tol) {
    return [&s, m, tol](const Vec& ab) { return segment_image_length(s, ab.head(m), ab.tail(m), tol); };
  };
  r.C1_estimate = sampled_sup(seg_stat(1e-4), segs, n, step, inner);
  r.C1_refined = std::max(r.C1_estimate, sampled_sup(seg_stat(5e-5), segs, 2 * n, step, inner));
  r.C1_stable = std::isfinite(r.C1_refined) && r.C1_refined <= 1.05 * r.C1_estimate;
  r.segments_used = static_cast<int>(2 * n);
  return r;
}

void certify(Scaffold& s, const AuditReport& r) { s.set_constants(1.1 * r.C0_refined, 1.1 * r.C1_refined); }

void Scaffold::save(std::ostream& os) const {
  nlohmann::json h;
  h["target"] = target_->id();
  h["kind"] = kind_ == ScaffoldKind::GenericGrid ? "generic" : "analytic";
  h["M"] = M_;
  h["sigma"] = sigma_;
  h["Lambda"] = Lambda();
  h["q"] = q_;
  h["C0"] = C0_;
  h["C1"] = C1_;
  const auto w = W();
  h["W_count"] = w.size();
  h["X_count"] = pieces_.size();
  os << kMagic << '\n' << h.dump() << '\n';
  os << "W";
  for (std::int64_t c : w) os << ' ' << c;
  os << "\nX\n";
  for (const DualPiece& p : pieces_) os << p.cube << ' ' << p.a << ' ' << p.b << ' ' << p.sides << '\n';
}

Scaffold Scaffold::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic) fail(ErrorKind::IngestError, "scaffold file: bad magic line");
  nlohmann::json h;
  try {
    std::getline(is, line);
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::IngestError, std::string("scaffold file: bad header: ") + e.what());
  }
  try {
    TargetPtr target = make_target(h.at("target").get<std::string>());
    const std::string kind = h.at("kind").get<std::string>();
    Scaffold s;
    if (kind == "analytic") {
      s = build_analytic_scaffold(target, h.at("M").get<double>(), h.at("sigma").get<double>());
    } else if (kind == "generic") {
      s.kind_ = ScaffoldKind::GenericGrid;
      s.target_ = target;
      s.M_ = h.at("M").get<double>();
      s.sigma_ = h.at("sigma").get<double>();
      s.q_ = h.at("q").get<int>();
      if (s.q_ < 1 || s.m() > 4) fail(ErrorKind::IngestError, "scaffold file: bad grid parameters");
      s.in_w_.assign(static_cast<std::size_t>(ipow(2 * s.q_, s.m())), 0);
      std::getline(is, line);
      std::istringstream ws(line);
      std::string tag;
      ws >> tag;
      if (tag != "W") fail(ErrorKind::IngestError, "scaffold file: missing W section");
      std::int64_t c;
      while (ws >> c) {
        if (c < 0 || c >= static_cast<std::int64_t>(s.in_w_.size())) fail(ErrorKind::IngestError, "scaffold file: W index out of range");
        s.in_w_[static_cast<std::size_t>(c)] = 1;
      }
      if (!std::getline(is, line) || line != "X") fail(ErrorKind::IngestError, "scaffold file: missing X section");
      DualPiece p;
      while (is >> p.cube >> p.a >> p.b >> p.sides) s.pieces_.push_back(p);
      if (s.pieces_.size() != h.at("X_count").get<std::size_t>())
        fail(ErrorKind::IngestError, "scaffold file: truncated X section");
      PolyChain X(s.m(), s.m() - 2);
      for (const DualPiece& q : s.pieces_) X.add(s.piece_polytope(q), static_cast<int>(q.cube));
      s.X_ = std::move(X);
    } else {
      fail(ErrorKind::IngestError, "scaffold file: unknown kind '" + kind + "'");
    }
    s.C0_ = json_number(h.at("C0"));
    s.C1_ = json_number(h.at("C1"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::IngestError, std::string("scaffold file: ") + e.what());
  }
}

}  // namespace liftbv
