#include "liftbv/transversal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace liftbv {

namespace {

constexpr double kRowTol = 1e-12;

// Inequality/equality rows collected before building a polytope; rows with a
// vanishing normal are checked on the spot.
class RowSet {
 public:
  explicit RowSet(int dim) : dim_(dim) {}

  void le(const Vec& a, double r) {
    if (a.norm() <= kRowTol) {
      feasible_ = feasible_ && r >= -1e-12;
      return;
    }
    A_.push_back(a), b_.push_back(r);
  }
  void eq(const Vec& a, double r) {
    if (a.norm() <= kRowTol) {
      feasible_ = feasible_ && std::abs(r) <= 1e-12;
      return;
    }
    E_.push_back(a), f_.push_back(r);
  }
  bool feasible() const { return feasible_; }

  HPolytope build() const {
    if (!feasible_) return HPolytope::empty(dim_);
    Mat A(static_cast<Eigen::Index>(A_.size()), dim_), E(static_cast<Eigen::Index>(E_.size()), dim_);
    Vec b(A.rows()), f(E.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) A.row(i) = A_[static_cast<std::size_t>(i)].transpose(), b(i) = b_[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < E.rows(); ++i) E.row(i) = E_[static_cast<std::size_t>(i)].transpose(), f(i) = f_[static_cast<std::size_t>(i)];
    return HPolytope(A, b, E, f);
  }

 private:
  int dim_;
  bool feasible_ = true;
  std::vector<Vec> A_, E_;
  std::vector<double> b_, f_;
};

// True if some row of K separates all the points from K.
bool separated(const HPolytope& K, const std::vector<Vec>& pts) {
  for (Eigen::Index i = 0; i < K.num_inequalities(); ++i) {
    bool all_out = true;
    for (const Vec& p : pts) all_out = all_out && K.A().row(i).dot(p) > K.b()(i) + kGeoEps;
    if (all_out) return true;
  }
  for (Eigen::Index i = 0; i < K.num_equalities(); ++i) {
    bool above = true, below = true;
    for (const Vec& p : pts) {
      const double v = K.E().row(i).dot(p) - K.f()(i);
      above = above && v > kGeoEps;
      below = below && v < -kGeoEps;
    }
    if (above || below) return true;
  }
  return false;
}

void check_range(const PiecewiseAffineMap& u, const Scaffold& s) {
  if (u.target_dim() != s.m()) fail(ErrorKind::InvalidArgument, "field dimension does not match the target");
  if (u.values().size() > 0 && u.values().cwiseAbs().maxCoeff() > s.Lambda() + 1e-12)
    fail(ErrorKind::InvalidArgument, "field leaves [-Lambda, Lambda]^m");
}

Vec simplex_point(const Triangulation& T, const Simplex& S, const Vec& bary) {
  Vec x = Vec::Zero(T.dim());
  for (int k = 0; k <= T.dim(); ++k) x += bary(k) * T.vertex(S[static_cast<std::size_t>(k)]);
  return x;
}

Vec random_shift(const Scaffold& s, std::mt19937_64& rng) {
  std::normal_distribution<double> G;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec y(s.m());
  for (int k = 0; k < s.m(); ++k) y(k) = G(rng);
  const double r = s.sigma() * (1 - 1e-9) * std::pow(U(rng), 1.0 / s.m());
  return y * (r / y.norm());
}

// Per-simplex output of the exact computation.
struct LocalSets {
  std::vector<HPolytope> T, S;
  std::vector<int> T_member;
  double measure = 0.0;
  std::string bad;
};

constexpr std::size_t kChunk = 64;

}  // namespace

Vec default_anchor(const PiecewiseAffineMap& u, const CoverTarget& t) {
  const Vec mean = u.values().rowwise().mean();
  if (t.singular_distance(mean) > 1e-6 * t.extent()) {
    if (auto p = t.nearest_N(mean)) return *p;
  }
  for (Eigen::Index v = 0; v < u.values().cols(); ++v)
    if (auto p = t.nearest_N(u.values().col(v))) return *p;
  return t.base_point();
}

double conditioning_margin(const Scaffold& s) { return std::max(kGeoEps, 0.01 * s.sigma()); }

SingularSets singular_sets(const Homotopy& h, const Scaffold& s, const Vec& y) {
  const PiecewiseAffineMap& u = h.u;
  const Triangulation& tri = u.triangulation();
  const int d = tri.dim();
  check_range(u, s);
  if (!(y.norm() < s.sigma())) fail(ErrorKind::InvalidArgument, "singular_sets: shift outside the sigma-ball");

  SingularSets out(d);
  out.y = y;
  const Vec w = h.u_star - y;
  const double dw = s.dist_to_X(w);
  const double margin = conditioning_margin(s);
  if (dw <= margin) {
    out.reason = "anchor lies on the shifted singular set";
    return out;
  }
  for (Eigen::Index v = 0; v < u.values().cols(); ++v)
    if (s.dist_to_X(u.values().col(v) - y) <= margin) {
      out.reason = "vertex " + std::to_string(v) + " maps onto the shifted singular set";
      return out;
    }
  if (d == 1) {
    // Continuous in one dimension: lifted directly along the interval.
    out.certificate = true;
    return out;
  }
  if (!s.polyhedral()) {
    out.certificate = true;
    out.approximate = true;
    return out;
  }

  const auto& members = s.X()->members();
  const std::size_t ns = tri.num_simplices();
  std::vector<LocalSets> local(ns);
  const std::size_t chunks = (ns + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t ch) {
    for (std::size_t si = ch * kChunk; si < std::min(ns, (ch + 1) * kChunk); ++si) {
      LocalSets& L = local[si];
      const Simplex& S = tri.simplices()[si];
      Mat J;
      Vec c;
      u.affine_piece(static_cast<int>(si), J, c);
      Mat Bb;
      Vec cb;
      tri.barycentric_map(static_cast<int>(si), Bb, cb);

      std::vector<Vec> hull{w};
      double rmax = 0.0;
      Vec lo = w, hi = w;
      for (int k = 0; k <= d; ++k) {
        const Vec val = u.values().col(S[static_cast<std::size_t>(k)]);
        hull.push_back(val - y);
        lo = lo.cwiseMin(val - y);
        hi = hi.cwiseMax(val - y);
        rmax = std::max(rmax, (val - h.u_star).norm());
      }
      const double mu_max = rmax / dw + 1.0;

      for (std::size_t mi : s.X_near(lo, hi)) {
        const HPolytope& K = members[mi].poly;
        if (separated(K, hull)) continue;

        // (x, mu) with mu = 1/(1 - t): U(t,x) - y in K becomes linear.
        RowSet rows(d + 1);
        for (int r = 0; r <= d; ++r) {
          Vec a(d + 1);
          a << -Bb.row(r).transpose(), 0.0;
          rows.le(a, cb(r));
        }
        Vec emu = Vec::Zero(d + 1);
        emu(d) = -1.0;
        rows.le(emu, -1.0);
        emu(d) = 1.0;
        rows.le(emu, mu_max);
        const Vec base = c - h.u_star;
        for (Eigen::Index i = 0; i < K.num_inequalities(); ++i) {
          const Vec a = K.A().row(i).transpose();
          Vec row(d + 1);
          row << J.transpose() * a, -(K.b()(i) - a.dot(w));
          rows.le(row, -a.dot(base));
        }
        for (Eigen::Index i = 0; i < K.num_equalities(); ++i) {
          const Vec e = K.E().row(i).transpose();
          Vec row(d + 1);
          row << J.transpose() * e, -(K.f()(i) - e.dot(w));
          rows.eq(row, -e.dot(base));
        }
        const HPolytope P = rows.build();
        if (P.is_empty()) continue;

        HPolytope Tp = fm_project(P, d);
        if (Tp.is_empty()) continue;
        const std::vector<Vec> tv = vertices(Tp);
        const int td = affine_dim(tv);
        if (td > d - 1) {
          L.bad = "T piece of dimension " + std::to_string(td) + " in simplex " + std::to_string(si);
          continue;
        }
        if (td == d - 1) {
          for (int r = 0; r <= d; ++r) {
            bool on_facet = true;
            for (const Vec& p : tv) on_facet = on_facet && Bb.row(r).dot(p) + cb(r) <= kGeoEps;
            if (on_facet) L.bad = "T piece inside a facet of simplex " + std::to_string(si);
          }
          L.measure += hull_measure(tv, d - 1);
        }
        L.T.push_back(std::move(Tp));
        L.T_member.push_back(static_cast<int>(mi));

        // S piece: the t = 0 slice.
        RowSet srows(d);
        for (int r = 0; r <= d; ++r) srows.le(-Bb.row(r).transpose(), cb(r));
        const Vec sb = c - y;
        for (Eigen::Index i = 0; i < K.num_inequalities(); ++i) {
          const Vec a = K.A().row(i).transpose();
          srows.le(J.transpose() * a, K.b()(i) - a.dot(sb));
        }
        for (Eigen::Index i = 0; i < K.num_equalities(); ++i) {
          const Vec e = K.E().row(i).transpose();
          srows.eq(J.transpose() * e, K.f()(i) - e.dot(sb));
        }
        HPolytope Sp = srows.build();
        if (Sp.is_empty()) continue;
        const std::vector<Vec> sv = vertices(Sp);
        if (affine_dim(sv) > d - 2) L.bad = "S piece of excess dimension in simplex " + std::to_string(si);
        for (const Vec& p : sv)
          if ((Bb * p + cb).minCoeff() <= kGeoEps) L.bad = "S point on the boundary of simplex " + std::to_string(si);
        L.S.push_back(std::move(Sp));
      }
    }
  });

  out.certificate = true;
  for (std::size_t si = 0; si < ns; ++si) {
    LocalSets& L = local[si];
    if (!L.bad.empty() && out.certificate) {
      out.certificate = false;
      out.reason = L.bad;
    }
    for (std::size_t k = 0; k < L.T.size(); ++k) {
      out.T.add(std::move(L.T[k]), L.T_member[k]);
      out.T_simplex.push_back(static_cast<int>(si));
      out.T_member.push_back(L.T_member[k]);
    }
    for (auto& p : L.S) {
      out.S.add(std::move(p), static_cast<int>(si));
      out.S_simplex.push_back(static_cast<int>(si));
    }
    out.T_measure += L.measure;
  }
  return out;
}

bool in_forbidden_set(const Homotopy& h, const Scaffold& s, const Vec& y, double t, const Vec& x) {
  if (t < 0 || t > 1) fail(ErrorKind::InvalidArgument, "in_forbidden_set: t outside [0, 1]");
  const Vec w = h.u_star - y;
  const Vec ux = h.u.eval(x);
  if (!s.polyhedral()) {
    // Dense scan of the segment followed by golden-section refinement.
    auto dist = [&](double r) { return s.dist_to_X((1 - r) * ux + r * h.u_star - y); };
    const int n = 256;
    double best = std::numeric_limits<double>::infinity(), arg = t;
    for (int i = 0; i <= n; ++i) {
      const double r = t + (1 - t) * i / n;
      const double v = dist(r);
      if (v < best) best = v, arg = r;
    }
    double a = std::max(t, arg - (1 - t) / n), b = std::min(1.0, arg + (1 - t) / n);
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    for (int it = 0; it < 80; ++it) {
      const double c1 = b - g * (b - a), c2 = a + g * (b - a);
      if (dist(c1) < dist(c2)) b = c2;
      else a = c1;
    }
    return std::min(best, dist(0.5 * (a + b))) <= 1e-6;
  }
  const double tol = 1e-9;
  for (const auto& mem : s.X()->members()) {
    const HPolytope& K = mem.poly;
    if (t >= 1.0) {
      if (K.contains(w, tol)) return true;
      continue;
    }
    // mu in [1/(1 - t), inf) with (ux - u_*) . a <= mu (b - a . w) per row.
    double lo = 1.0 / (1.0 - t), hi = std::numeric_limits<double>::infinity();
    bool ok = true;
    const Vec g = ux - h.u_star;
    for (Eigen::Index i = 0; i < K.num_inequalities() && ok; ++i) {
      const double alpha = K.A().row(i).dot(g), beta = K.b()(i) - K.A().row(i).dot(w);
      if (std::abs(beta) <= 1e-15) ok = alpha <= tol;
      else if (beta > 0) lo = std::max(lo, (alpha - tol) / beta);
      else hi = std::min(hi, (alpha - tol) / beta);
    }
    for (Eigen::Index i = 0; i < K.num_equalities() && ok; ++i) {
      const double alpha = K.E().row(i).dot(g), gamma = K.f()(i) - K.E().row(i).dot(w);
      if (std::abs(gamma) <= 1e-15) {
        ok = std::abs(alpha) <= tol;
      } else {
        const double mu = alpha / gamma, slack = tol * (1 + std::abs(mu)) / std::abs(gamma);
        lo = std::max(lo, mu - slack);
        hi = std::min(hi, mu + slack);
      }
    }
    if (ok && lo <= hi) return true;
  }
  return false;
}

double retracted_gradient_l1(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y, int order) {
  const Triangulation& tri = u.triangulation();
  const int d = tri.dim();
  const double delta = 1e-7 * (tri.hi() - tri.lo()).maxCoeff();
  QuadratureRule centroid;
  centroid.bary = {Vec::Constant(d + 1, 1.0 / (d + 1))};
  centroid.weight = {1.0};
  const QuadratureRule& rule = order <= 1 ? centroid : simplex_rule(d);
  const std::size_t ns = tri.num_simplices();
  const std::size_t chunks = (ns + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ch) {
    double acc = 0.0;
    for (std::size_t si = ch * kChunk; si < std::min(ns, (ch + 1) * kChunk); ++si) {
      Mat J;
      Vec c;
      u.affine_piece(static_cast<int>(si), J, c);
      const double vol = tri.simplex_volume(static_cast<int>(si));
      for (std::size_t q = 0; q < rule.bary.size(); ++q) {
        const Vec z = J * simplex_point(tri, tri.simplices()[si], rule.bary[q]) + c;
        double g2 = 0.0;
        try {
          for (int k = 0; k < d; ++k) {
            const Vec dz = delta * J.col(k);
            g2 += ((retract_shifted(s, y, z + dz) - retract_shifted(s, y, z - dz)) / (2 * delta)).squaredNorm();
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NearSingular) throw;
          continue;  // node on the shifted singular set: measure zero
        }
        acc += rule.weight[q] * vol * std::sqrt(g2);
      }
    }
    partial[ch] = acc;
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double anchor_weighted_variation(const PiecewiseAffineMap& u, const Vec& u_star) {
  const Triangulation& tri = u.triangulation();
  const QuadratureRule& rule = simplex_rule(tri.dim());
  double acc = 0.0;
  for (std::size_t si = 0; si < tri.num_simplices(); ++si) {
    Mat J;
    Vec c;
    u.affine_piece(static_cast<int>(si), J, c);
    double avg = 0.0;
    for (std::size_t q = 0; q < rule.bary.size(); ++q)
      avg += rule.weight[q] * (J * simplex_point(tri, tri.simplices()[si], rule.bary[q]) + c - u_star).norm();
    acc += J.norm() * tri.simplex_volume(static_cast<int>(si)) * avg;
  }
  return acc;
}

ShiftSelection select_shift(const Homotopy& h, const Scaffold& s, int trials, std::uint64_t seed) {
  if (trials < 1) fail(ErrorKind::InvalidArgument, "select_shift: trials must be >= 1");
  check_range(h.u, s);
  std::mt19937_64 rng(seed);
  std::vector<Vec> ys;
  for (int i = 0; i < trials; ++i) ys.push_back(random_shift(s, rng));

  ShiftSelection sel{Vec(), SingularSets(h.u.triangulation().dim()), {}, -1, 0.0};
  std::vector<std::optional<SingularSets>> sets(static_cast<std::size_t>(trials));
  std::vector<double> certified_scores;
  for (int i = 0; i < trials; ++i) {
    ShiftTrial tr;
    tr.y = ys[static_cast<std::size_t>(i)];
    SingularSets ss = singular_sets(h, s, tr.y);
    tr.certificate = ss.certificate;
    tr.reason = ss.reason;
    tr.T_measure = ss.T_measure;
    if (tr.certificate) {
      try {
        tr.grad_l1 = retracted_gradient_l1(h.u, s, tr.y, 1);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearSingular && e.kind() != ErrorKind::ProjectionFailure) throw;
        tr.certificate = false;
        tr.reason = e.what();
      }
    }
    tr.score = tr.certificate ? tr.grad_l1 + tr.T_measure : std::numeric_limits<double>::infinity();
    if (tr.certificate) {
      certified_scores.push_back(tr.score);
      sets[static_cast<std::size_t>(i)] = std::move(ss);
    }
    sel.trials.push_back(std::move(tr));
  }
  if (certified_scores.empty())
    fail(ErrorKind::SelectionFailure, "select_shift: no transversal shift in " + std::to_string(trials) + " draws");
  std::vector<double> sorted = certified_scores;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  sel.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (int i = 0; i < trials; ++i) {
    const ShiftTrial& tr = sel.trials[static_cast<std::size_t>(i)];
    if (tr.certificate && tr.score <= 2 * sel.median) {
      sel.accepted = i;
      sel.y = tr.y;
      sel.sets = std::move(*sets[static_cast<std::size_t>(i)]);
      break;
    }
  }
  return sel;
}

bool AveragedBounds::stable(double rel) const {
  auto close = [rel](double a, double b) {
    if (a == 0.0 && b == 0.0) return true;
    return std::abs(b - a) <= rel * std::max(std::abs(a), std::abs(b));
  };
  return certified > 0 && close(mean_grad, mean_grad_doubled) && close(mean_T, mean_T_doubled);
}

AveragedBounds averaged_bounds(const Homotopy& h, const Scaffold& s, int shifts, std::uint64_t seed) {
  if (shifts < 1) fail(ErrorKind::InvalidArgument, "averaged_bounds: shifts must be >= 1");
  AveragedBounds r;
  r.shifts = shifts;
  r.tv_u = h.u.total_variation();
  r.weighted_variation = anchor_weighted_variation(h.u, h.u_star);
  std::mt19937_64 rng(seed);
  double sg = 0, sT = 0;
  int n = 0, n_half = 0;
  for (int i = 0; i < 2 * shifts; ++i) {
    const Vec y = random_shift(s, rng);
    const SingularSets ss = singular_sets(h, s, y);
    if (ss.certificate) {
      double g;
      try {
        g = retracted_gradient_l1(h.u, s, y, 1);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearSingular && e.kind() != ErrorKind::ProjectionFailure) throw;
        continue;
      }
      sg += g, sT += ss.T_measure, ++n;
    }
    if (i + 1 == shifts) {
      n_half = n;
      r.mean_grad = n ? sg / n : 0.0;
      r.mean_T = n ? sT / n : 0.0;
    }
  }
  r.certified = std::min(n_half, n);
  r.mean_grad_doubled = n ? sg / n : 0.0;
  r.mean_T_doubled = n ? sT / n : 0.0;
  return r;
}

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

CoareaCheck coarea_bound_check(const Mat& B, const Vec& c, const Vec& v_star, const Vec& lo, const Vec& hi,
                               int resolution) {
  const int d = static_cast<int>(lo.size());
  if (d < 2 || d > 3) fail(ErrorKind::InvalidArgument, "coarea_bound_check: d must be 2 or 3");
  if (B.rows() != 2 || B.cols() != d || c.size() != 2 || v_star.size() != 2)
    fail(ErrorKind::InvalidArgument, "coarea_bound_check: v must map R^d to R^2");
  if (resolution < 1) fail(ErrorKind::InvalidArgument, "coarea_bound_check: resolution must be >= 1");

  // Image bounding box from the box corners and v_*.
  Vec zlo = v_star, zhi = v_star;
  double rmax = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x(k) = (corner >> k) & 1 ? hi(k) : lo(k);
    const Vec v = B * x + c;
    zlo = zlo.cwiseMin(v);
    zhi = zhi.cwiseMax(v);
    rmax = std::max(rmax, (v - v_star).norm());
  }
  CoareaCheck out;
  const Vec dz = (zhi - zlo) / resolution;
  const double cell = dz.prod();
  if (cell > 0) {
    const auto n = static_cast<std::size_t>(resolution);
    std::vector<double> row_sum(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const Vec z = zlo + Vec2((static_cast<double>(i) + 0.5) * dz(0), (static_cast<double>(j) + 0.5) * dz(1));
        const Vec g = z - v_star;
        if (g.norm() < 1e-14) continue;
        // {(x, mu) : x in box, B x + c - v_* = mu (z - v_*), mu >= 1}.
        RowSet rows(d + 1);
        for (int k = 0; k < d; ++k) {
          Vec e = Vec::Zero(d + 1);
          e(k) = 1;
          rows.le(e, hi(k));
          e(k) = -1;
          rows.le(e, -lo(k));
        }
        Vec e = Vec::Zero(d + 1);
        e(d) = -1;
        rows.le(e, -1.0);
        e(d) = 1;
        rows.le(e, rmax / g.norm() + 1.0);
        for (int r = 0; r < 2; ++r) {
          Vec a(d + 1);
          a << B.row(r).transpose(), -g(r);
          rows.eq(a, v_star(r) - c(r));
        }
        const HPolytope P = rows.build();
        if (P.is_empty()) continue;
        const std::vector<Vec> vs = vertices(fm_project(P, d));
        if (affine_dim(vs) == d - 1) acc += hull_measure(vs, d - 1);
      }
      row_sum[i] = acc;
    });
    out.lhs = cell * std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  }

  // rhs = 2 |B|_F * integral of |v - v_*| by tensor Gauss-Legendre on subcells.
  const int sub = 8;
  const Vec h = (hi - lo) / sub;
  double integral = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(2 * d), 0);
  const int per_axis = sub * 8;
  const long total = static_cast<long>(std::pow(per_axis, d));
  for (long flat = 0; flat < total; ++flat) {
    long r = flat;
    Vec x(d);
    double wgt = 1.0;
    for (int k = 0; k < d; ++k) {
      const int a = static_cast<int>(r % per_axis);
      r /= per_axis;
      const int cellk = a / 8, node = a % 8;
      x(k) = lo(k) + (cellk + 0.5 * (kGLx[node] + 1)) * h(k);
      wgt *= 0.5 * kGLw[node] * h(k);
    }
    integral += wgt * (B * x + c - v_star).norm();
  }
  out.rhs = 2.0 * B.norm() * integral;
  out.holds = out.lhs <= out.rhs * (1 + 1e-6) + 1e-9;
  return out;
}

}  // namespace liftbv
