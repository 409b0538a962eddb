#include "liftbv/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace liftbv {

namespace {

constexpr std::size_t kChunk = 32;
constexpr double kFiberTol = 1e-6;
constexpr double kLabelTol = 1e-3;

Vec retract_or_jump(const Scaffold& s, const Vec& y, const Vec& z) {
  try {
    return retract_shifted(s, y, z);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NearSingular || e.kind() == ErrorKind::ProjectionFailure)
      fail(ErrorKind::NearJump, std::string("path meets the shifted singular set (") + e.what() + ")");
    throw;
  }
}

// Lift of the N-valued curve r -> n(r), r in [0, 1], starting at w over n(0).
Vec lift_curve(const CoverTarget& t, const std::function<Vec(double)>& n_of, Vec w, const PathOptions& opt) {
  const double lim = opt.step_fraction * t.r_inj();
  Vec n = n_of(0.0);
  double r = 0.0, dr = 0.125;
  int evals = 0;
  while (r < 1.0) {
    dr = std::min(dr, 1.0 - r);
    const Vec nm = n_of(r + 0.5 * dr), n1 = n_of(r + dr);
    evals += 2;
    if (evals > opt.budget) fail(ErrorKind::LiftFailure, "path lifting exceeded its step budget");
    if (t.dist_N(n, nm) < 0.5 * lim && t.dist_N(nm, n1) < 0.5 * lim && t.dist_N(n, n1) < lim) {
      w = t.lift_step(t.lift_step(w, nm), n1);
      n = n1;
      r += dr;
      dr = std::min(0.25, 2 * dr);
    } else {
      dr *= 0.5;
      if (dr < opt.min_dt) fail(ErrorKind::NearJump, "path lifting cannot resolve a step near the jump set");
    }
  }
  return w;
}

double unit_ball_volume(int k) { return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1); }

std::vector<std::pair<Vec, Vec>> member_boxes(const PolyChain& X) {
  std::vector<std::pair<Vec, Vec>> out;
  for (const auto& mem : X.members()) {
    const std::vector<Vec> vs = vertices(mem.poly);
    Vec lo = vs.front(), hi = vs.front();
    for (const Vec& v : vs) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
    out.emplace_back(lo, hi);
  }
  return out;
}

// Unit normal of the affine hull of a (d-1)-dimensional point set in R^d.
Vec facet_normal(const std::vector<Vec>& vs) {
  const int d = static_cast<int>(vs.front().size());
  Vec c = Vec::Zero(d);
  for (const Vec& v : vs) c += v;
  c /= static_cast<double>(vs.size());
  Mat D(d, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) D.col(static_cast<Eigen::Index>(i)) = vs[i] - c;
  Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullU);
  Vec n = svd.matrixU().col(d - 1);
  // Deterministic orientation: first significant coordinate positive.
  for (int k = 0; k < d; ++k)
    if (std::abs(n(k)) > 1e-12) {
      if (n(k) < 0) n = -n;
      break;
    }
  return n;
}

// Vertices of a convex polygon in R^3 ordered around its centroid.
std::vector<Vec> order_polygon(std::vector<Vec> vs, const Vec& n) {
  Vec c = Vec::Zero(3);
  for (const Vec& v : vs) c += v;
  c /= static_cast<double>(vs.size());
  const Vec3 nn = n.head<3>();
  Vec3 e1 = (vs.front() - c).head<3>();
  if (e1.norm() < 1e-15) e1 = nn.unitOrthogonal();
  e1.normalize();
  const Vec3 e2 = nn.cross(e1);
  std::sort(vs.begin(), vs.end(), [&](const Vec& a, const Vec& b) {
    const Vec3 da = (a - c).head<3>(), db = (b - c).head<3>();
    return std::atan2(da.dot(e2), da.dot(e1)) < std::atan2(db.dot(e2), db.dot(e1));
  });
  return vs;
}

// Quadrature points and weights on the facet: composite 2-point Gauss on
// segments, fan triangles with the 3-point rule on polygons.
void facet_quadrature(JumpFacet& f, int samples) {
  f.points.clear();
  f.weights.clear();
  const std::size_t d = static_cast<std::size_t>(f.normal.size());
  if (d == 2) {
    const Vec a = f.vertices[0], b = f.vertices[1];
    const int pieces = std::max(1, (samples + 1) / 2);
    const double g = 0.5 / std::sqrt(3.0);
    for (int k = 0; k < pieces; ++k)
      for (double off : {0.5 - g, 0.5 + g}) {
        f.points.push_back(a + (b - a) * ((k + off) / pieces));
        f.weights.push_back(0.5 * f.measure / pieces);
      }
    return;
  }
  if (d != 3) fail(ErrorKind::InvalidArgument, "jump facets are supported for d <= 3");
  const std::vector<Vec> poly = order_polygon(f.vertices, f.normal);
  Vec c = Vec::Zero(3);
  for (const Vec& v : poly) c += v;
  c /= static_cast<double>(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % poly.size()];
    const double area = 0.5 * (p - c).head<3>().cross((q - c).head<3>()).norm();
    if (area <= 0) continue;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d bary = Eigen::Vector3d::Constant(1.0 / 6.0);
      bary(k) = 2.0 / 3.0;
      f.points.push_back(bary(0) * c + bary(1) * p + bary(2) * q);
      f.weights.push_back(area / 3.0);
    }
  }
}

std::optional<JumpFacet> make_facet(const HPolytope& carrier, int simplex) {
  const int d = carrier.dim();
  std::vector<Vec> vs = vertices(carrier);
  if (vs.size() < static_cast<std::size_t>(d) || affine_dim(vs) != d - 1) return std::nullopt;
  JumpFacet f(d);
  f.carrier = carrier;
  f.vertices = std::move(vs);
  f.normal = facet_normal(f.vertices);
  f.simplex = simplex;
  f.measure = hull_measure(f.vertices, d - 1);
  if (f.measure <= 0) return std::nullopt;
  return f;
}

double feature_size(const JumpFacet& f) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < f.vertices.size(); ++j) m = std::min(m, (f.vertices[i] - f.vertices[j]).norm());
  return m;
}

std::vector<std::array<int, 2>> mesh_edges(const Triangulation& tri) {
  std::vector<std::array<int, 2>> edges;
  const int d = tri.dim();
  for (const Simplex& S : tri.simplices())
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        const int a = S[static_cast<std::size_t>(i)], b = S[static_cast<std::size_t>(j)];
        edges.push_back({std::min(a, b), std::max(a, b)});
      }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

struct EdgeCrossing {
  Vec p;
  Vec wa, wb;  // one-sided lifts on the a and b sides, over rho_y(u(p))
};

// Jump facets located from mesh edges whose endpoint lifts disagree with the
// lift along the edge; used when X has no polyhedral description (d = 2).
// Traces come from the bisected crossings, so facets need no offsets.
std::vector<JumpFacet> edge_crossing_facets(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& w_anchor,
                                            const Mat& vv, const PathOptions& opt) {
  const PiecewiseAffineMap& u = h.u;
  const Triangulation& tri = u.triangulation();
  const CoverTarget& t = s.target();
  const auto edges = mesh_edges(tri);
  std::vector<std::optional<EdgeCrossing>> cross(edges.size());
  const std::size_t chunks = (edges.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t ch) {
    for (std::size_t e = ch * kChunk; e < std::min(edges.size(), (ch + 1) * kChunk); ++e) {
      const Vec a = tri.vertex(edges[e][0]), b = tri.vertex(edges[e][1]);
      const Vec va = vv.col(edges[e][0]), vb = vv.col(edges[e][1]);
      auto along = [&](double r) { return path_lift(u, s, y, {a, Vec(a + r * (b - a))}, va, opt); };
      if (t.dist_E(along(1.0), vb) <= kFiberTol) continue;
      double lo = 0.0, hi = 1.0;
      Vec whi = vb;
      for (int it = 0; it < 26; ++it) {
        const double mid = 0.5 * (lo + hi);
        try {
          const Vec wc = cylinder_lift(h, s, y, a + mid * (b - a), w_anchor, opt);
          if (t.dist_E(along(mid), wc) <= kFiberTol) {
            lo = mid;
          } else {
            hi = mid;
            whi = wc;
          }
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::NearJump) throw;
          hi = mid;
        }
      }
      EdgeCrossing c;
      c.p = a + 0.5 * (lo + hi) * (b - a);
      const Vec base = retract_or_jump(s, y, u.eval(c.p));
      c.wa = t.lift_step(along(lo), base);
      c.wb = t.lift_step(whi, base);
      cross[e] = std::move(c);
    }
  });

  std::map<std::array<int, 2>, std::size_t> index;
  for (std::size_t e = 0; e < edges.size(); ++e) index[edges[e]] = e;
  std::vector<JumpFacet> out;
  for (std::size_t si = 0; si < tri.num_simplices(); ++si) {
    const Simplex& S = tri.simplices()[si];
    std::vector<std::pair<const EdgeCrossing*, Vec>> pts;  // crossing, endpoint a of its edge
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const int a = S[static_cast<std::size_t>(i)], b = S[static_cast<std::size_t>(j)];
        const auto& c = cross[index.at({std::min(a, b), std::max(a, b)})];
        if (c) pts.emplace_back(&*c, tri.vertex(std::min(a, b)));
      }
    auto add = [&](const Vec& p, const Vec& q, const std::vector<std::pair<const EdgeCrossing*, Vec>>& ends) {
      if ((p - q).norm() < 1e-12) return;
      auto f = make_facet(HPolytope::segment(p, q), static_cast<int>(si));
      if (!f) return;
      for (const auto& [c, a] : ends) {
        const bool a_plus = f->normal.dot(a - c->p) > 0;
        f->points.push_back(c->p);
        f->weights.push_back(f->measure / static_cast<double>(ends.size()));
        f->plus.push_back(a_plus ? c->wa : c->wb);
        f->minus.push_back(a_plus ? c->wb : c->wa);
      }
      out.push_back(std::move(*f));
    };
    if (pts.size() == 2) {
      add(pts[0].first->p, pts[1].first->p, pts);
    } else if (!pts.empty()) {
      // A curve ends or branches inside the simplex; join the crossings to its centroid.
      Vec c = Vec::Zero(2);
      for (int k = 0; k < 3; ++k) c += tri.vertex(S[static_cast<std::size_t>(k)]) / 3.0;
      const std::size_t first = out.size();
      for (const auto& pt : pts) add(pt.first->p, c, {pt});
      for (std::size_t k = first; k < out.size(); ++k) out[k].core = true;
    }
  }
  return out;
}

// Label and jump statistics from stored traces; splits segments whose two
// endpoint labels differ.
std::vector<JumpFacet> finish_crossing_facet(const CoverTarget& t, JumpFacet f) {
  std::vector<JumpFacet> out;
  std::vector<DeckElement> labels;
  for (std::size_t i = 0; i < f.points.size(); ++i) labels.push_back(t.deck_identify(f.minus[i], f.plus[i], kLabelTol));
  if (labels.size() == 2 && !(labels[0] == labels[1])) {
    const Vec mid = 0.5 * (f.vertices[0] + f.vertices[1]);
    for (int k = 0; k < 2; ++k) {
      const std::size_t end = (f.vertices[0] - f.points[static_cast<std::size_t>(k)]).norm() <
                                      (f.vertices[1] - f.points[static_cast<std::size_t>(k)]).norm()
                                  ? 0
                                  : 1;
      auto g = make_facet(HPolytope::segment(f.vertices[end], mid), f.simplex);
      if (!g) continue;
      g->normal = f.normal;
      g->core = f.core;
      g->points = {f.points[static_cast<std::size_t>(k)]};
      g->weights = {g->measure};
      g->plus = {f.plus[static_cast<std::size_t>(k)]};
      g->minus = {f.minus[static_cast<std::size_t>(k)]};
      for (auto& h : finish_crossing_facet(t, std::move(*g))) out.push_back(std::move(h));
    }
    return out;
  }
  f.label = labels.front();
  f.label_name = t.deck_name(f.label);
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const double geo = t.dist_E(f.plus[i], f.minus[i]);
    f.max_jump = std::max(f.max_jump, geo);
    f.jump_integral += f.weights[i] * (t.embed_E(f.plus[i]) - t.embed_E(f.minus[i])).norm();
    f.geodesic_integral += f.weights[i] * geo;
  }
  out.push_back(std::move(f));
  return out;
}

// Splits f by the hyperplane through the midpoint of p and q, normal to q - p.
std::vector<JumpFacet> split_facet(const JumpFacet& f, const Vec& p, const Vec& q) {
  const int d = f.carrier.dim();
  const Vec n = (q - p).normalized();
  const double c = n.dot(0.5 * (p + q));
  std::vector<JumpFacet> out;
  for (double sgn : {1.0, -1.0}) {
    const HPolytope half(Mat(sgn * n.transpose()), Vec::Constant(1, sgn * c));
    if (auto g = make_facet(f.carrier.intersect(half), f.simplex)) {
      g->normal = f.normal;
      out.push_back(std::move(*g));
    }
  }
  (void)d;
  return out;
}

// One centroid sample; a trivial label there marks the facet as removable.
bool facet_looks_trivial(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& w_anchor, const JumpFacet& f,
                         const PathOptions& opt) {
  const CoverTarget& t = s.target();
  Vec c = Vec::Zero(f.normal.size());
  for (const Vec& v : f.vertices) c += v;
  c /= static_cast<double>(f.vertices.size());
  const Vec spacing = h.u.triangulation().spacing();
  const double eps = std::max(std::min(feature_size(f), spacing.minCoeff()) / 8, 1e-7 * spacing.minCoeff());
  try {
    const Vec base = retract_or_jump(s, y, h.u.eval(c));
    const Vec vp = t.lift_step(cylinder_lift(h, s, y, c + eps * f.normal, w_anchor, opt), base);
    const Vec vm = t.lift_step(cylinder_lift(h, s, y, c - eps * f.normal, w_anchor, opt), base);
    return t.dist_E(vp, vm) <= kFiberTol;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NearJump && e.kind() != ErrorKind::StepTooLarge) throw;
    return false;
  }
}

double lifted_gradient_l1(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y) {
  const Triangulation& tri = u.triangulation();
  const CoverTarget& t = s.target();
  const int d = tri.dim();
  const QuadratureRule& rule = simplex_rule(d);
  const double delta = 1e-7 * (tri.hi() - tri.lo()).maxCoeff();
  const std::size_t ns = tri.num_simplices();
  const std::size_t chunks = (ns + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t ch) {
    double acc = 0.0;
    for (std::size_t si = ch * kChunk; si < std::min(ns, (ch + 1) * kChunk); ++si) {
      Mat J;
      Vec c;
      u.affine_piece(static_cast<int>(si), J, c);
      const Simplex& S = tri.simplices()[si];
      const double vol = tri.simplex_volume(static_cast<int>(si));
      for (std::size_t q = 0; q < rule.bary.size(); ++q) {
        Vec x = Vec::Zero(d);
        for (int k = 0; k <= d; ++k) x += rule.bary[q](k) * tri.vertex(S[static_cast<std::size_t>(k)]);
        const Vec z = J * x + c;
        double g2 = 0.0;
        try {
          const Vec w0 = t.any_lift(retract_shifted(s, y, z));
          for (int k = 0; k < d; ++k) {
            const Vec dz = delta * J.col(k);
            const Vec wp = t.lift_step(w0, retract_shifted(s, y, z + dz));
            const Vec wm = t.lift_step(w0, retract_shifted(s, y, z - dz));
            g2 += ((t.embed_E(wp) - t.embed_E(wm)) / (2 * delta)).squaredNorm();
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NearSingular && e.kind() != ErrorKind::ProjectionFailure) throw;
          continue;  // node on the shifted singular set
        }
        acc += rule.weight[q] * vol * std::sqrt(g2);
      }
    }
    partial[ch] = acc;
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

}  // namespace

Vec cylinder_lift(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& x, const Vec& w_anchor,
                  const PathOptions& opt) {
  const CoverTarget& t = s.target();
  if (x.size() != h.u.domain_dim()) fail(ErrorKind::InvalidArgument, "cylinder_lift: point has the wrong dimension");
  const Vec start = retract_or_jump(s, y, h.u_star);
  if ((t.project(w_anchor) - start).norm() > 1e-6)
    fail(ErrorKind::InvalidArgument, "cylinder_lift: anchor lift does not cover the retracted anchor");
  const Vec ux = h.u.eval(x);
  // r = 1 - t runs from the anchor (t = 1) to the field (t = 0).
  return lift_curve(
      t, [&](double r) { return retract_or_jump(s, y, r * ux + (1 - r) * h.u_star); }, w_anchor, opt);
}

Vec path_lift(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y, const std::vector<Vec>& pts,
              const Vec& w0, const PathOptions& opt) {
  Vec w = w0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec a = pts[i], b = pts[i + 1];
    w = lift_curve(
        s.target(), [&](double r) { return retract_or_jump(s, y, u.eval(a + r * (b - a))); }, w, opt);
  }
  return w;
}

DeckElement path_lift_monodromy(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y,
                                const std::vector<Vec>& loop) {
  if (loop.size() < 3) fail(ErrorKind::InvalidArgument, "path_lift_monodromy: a loop needs at least three points");
  const CoverTarget& t = s.target();
  std::vector<Vec> closed = loop;
  closed.push_back(loop.front());
  PathOptions fine;
  fine.step_fraction = 0.05;
  try {
    const Vec w0 = t.any_lift(retract_or_jump(s, y, u.eval(loop.front())));
    return t.deck_identify(w0, path_lift(u, s, y, closed, w0, fine), kFiberTol);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NearJump) fail(ErrorKind::IllPosedLoop, "loop passes through the singular set");
    throw;
  }
}

LiftConstants lift_constants(const Scaffold& s, const Vec& y) {
  const CoverTarget& t = s.target();
  if (!std::isfinite(s.C0()) || !std::isfinite(s.C1()))
    fail(ErrorKind::InvalidArgument, "scaffold constants are not certified; audit the scaffold first");
  LiftConstants c;
  c.C0 = s.C0();
  c.C1 = s.C1();

  std::mt19937_64 rng(0x5eed);
  double L = 0.0;
  for (int i = 0; i < 400; ++i) {
    const Vec a = t.sample_N(rng), b = t.sample_N(rng);
    const double dab = t.dist_N(a, b);
    if (dab < 1e-6) continue;
    const Vec a2 = t.geodesic_N(a, b, 1e-5 / dab);
    const double img = (s.rho(a - y) - s.rho(a2 - y)).norm();
    if (img > 0) L = std::max(L, (a - a2).norm() / img);
  }
  c.L_corr = 1.1 * std::max(1.0, L);

  if (s.polyhedral() && !s.X()->empty()) {
    const auto boxes = member_boxes(*s.X());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto near = s.X_near(boxes[i].first.array() - 2 * s.sigma(), boxes[i].second.array() + 2 * s.sigma());
      int count = 0;
      for (std::size_t j : near) {
        const Vec gap = (boxes[j].first - boxes[i].second).cwiseMax(boxes[i].first - boxes[j].second).cwiseMax(0.0);
        count += gap.norm() <= 2 * s.sigma();
      }
      c.overlap = std::max(c.overlap, count);
    }
  }
  const int m = s.m();
  const double dens = unit_ball_volume(m - 2) / unit_ball_volume(m);
  c.C_grad = c.L_corr * c.C0 * c.overlap * 2 * std::numbers::pi * dens / s.sigma();
  c.C_T = 2.0 * c.overlap * dens / (s.sigma() * s.sigma());
  c.D = 2 * std::sqrt(static_cast<double>(m)) * s.Lambda();
  c.C_jump = std::min(2 * c.C1 * c.L_corr * t.kappa(), t.diam_E());
  c.C_tv = 4 * std::max(1.0, c.C_jump) * (c.C_grad + c.C_T * c.D);
  return c;
}

double LiftedField::max_jump() const {
  double m = 0.0;
  for (const auto& f : facets) m = std::max(m, f.max_jump);
  return m;
}

void jump_traces(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& w_anchor, JumpFacet& f, int samples,
                 const PathOptions& opt) {
  const CoverTarget& t = s.target();
  if (f.points.empty()) facet_quadrature(f, samples);
  const Vec spacing = h.u.triangulation().spacing();
  const double eps0 = std::max(std::min(feature_size(f), spacing.minCoeff()) / 8, 1e-7 * spacing.minCoeff());
  f.plus.assign(f.points.size(), Vec());
  f.minus.assign(f.points.size(), Vec());
  f.max_jump = f.jump_integral = f.geodesic_integral = 0.0;
  std::vector<DeckElement> labels;
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const Vec& p = f.points[i];
    const Vec base = retract_or_jump(s, y, h.u.eval(p));
    bool done = false;
    for (double scale : {1.0, 0.5, 2.0, 0.25}) {
      const double eps = scale * eps0;
      try {
        Vec side[2];
        for (int k = 0; k < 2; ++k) {
          const double sg = k == 0 ? 1.0 : -1.0;
          const Vec v1 = cylinder_lift(h, s, y, p + sg * eps * f.normal, w_anchor, opt);
          const Vec v2 = cylinder_lift(h, s, y, p + sg * 0.5 * eps * f.normal, w_anchor, opt);
          // Richardson step (eps, eps/2), then snap onto the fiber over p.
          side[k] = t.lift_step(t.combine_E(v2, v1, 2.0, -1.0), base);
        }
        f.plus[i] = side[0];
        f.minus[i] = side[1];
        done = true;
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearJump && e.kind() != ErrorKind::StepTooLarge) throw;
      }
    }
    if (!done) fail(ErrorKind::LiftFailure, "jump_traces: no admissible offset at a facet sample");
    labels.push_back(t.deck_identify(f.minus[i], f.plus[i], kLabelTol));
    const double geo = t.dist_E(f.plus[i], f.minus[i]);
    f.max_jump = std::max(f.max_jump, geo);
    f.jump_integral += f.weights[i] * (t.embed_E(f.plus[i]) - t.embed_E(f.minus[i])).norm();
    f.geodesic_integral += f.weights[i] * geo;
  }
  f.label = labels.front();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (!(labels[i] == f.label))
      fail(ErrorKind::FacetSplit, "jump_traces: deck label changes between samples " + std::to_string(i - 1) + " and " +
                                      std::to_string(i));
  f.label_name = t.deck_name(f.label);
}

BVRecord bv_measure(const LiftedField& lf, const PiecewiseAffineMap& u, const Scaffold& s) {
  BVRecord r;
  r.ac = lifted_gradient_l1(u, s, lf.y);
  for (const auto& f : lf.facets) {
    r.jump += f.jump_integral;
    r.geodesic_jump += f.geodesic_integral;
  }
  r.total = r.ac + r.jump;
  r.cantor = 0.0;
  return r;
}

void normalize(LiftedField& lf) {
  const CoverTarget& t = *lf.target;
  const Eigen::Index nv = lf.vertex_values.cols();
  if (nv == 0) return;
  const Eigen::Index stride = std::max<Eigen::Index>(1, (nv + 255) / 256);
  std::vector<Vec> pick;
  for (Eigen::Index i = 0; i < nv; i += stride) pick.push_back(lf.vertex_values.col(i));
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pick.size(); ++i) {
    double sum = 0.0;
    for (const Vec& q : pick) sum += t.dist_E(pick[i], q);
    if (sum < best_sum) best_sum = sum, best = i;
  }
  const DeckElement phi = t.normalize_to_fundamental_domain(pick[best]);
  const DeckElement inv = t.deck_inverse(phi);
  for (Eigen::Index i = 0; i < nv; ++i) lf.vertex_values.col(i) = t.deck_apply(inv, lf.vertex_values.col(i));
  lf.w_anchor = t.deck_apply(inv, lf.w_anchor);
  for (auto& f : lf.facets) {
    for (auto& v : f.plus) v = t.deck_apply(inv, v);
    for (auto& v : f.minus) v = t.deck_apply(inv, v);
    f.label = t.deck_compose(inv, t.deck_compose(f.label, phi));
    f.label_name = t.deck_name(f.label);
  }
  lf.normalization = t.deck_compose(lf.normalization, phi);
}

DeckElement loop_monodromy(const LiftedField& lf, const std::vector<Vec>& loop) {
  const CoverTarget& t = *lf.target;
  if (loop.size() < 3) fail(ErrorKind::InvalidArgument, "loop_monodromy: a loop needs at least three points");
  const double tol = 1e-9;
  DeckElement g = t.deck_identity();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec& a = loop[i];
    const Vec& b = loop[(i + 1) % loop.size()];
    std::vector<std::pair<double, DeckElement>> hits;
    for (const auto& f : lf.facets) {
      const double c = f.normal.dot(f.vertices.front());
      const double da = f.normal.dot(a) - c, db = f.normal.dot(b) - c;
      if ((da > tol && db > tol) || (da < -tol && db < -tol)) continue;
      if (std::abs(da) <= tol || std::abs(db) <= tol) {
        const Vec& on = std::abs(da) <= tol ? a : b;
        if (f.carrier.contains(on, tol)) fail(ErrorKind::IllPosedLoop, "loop vertex lies on a jump facet");
        continue;
      }
      const double r = da / (da - db);
      const Vec p = a + r * (b - a);
      if (!f.carrier.contains(p, tol)) continue;
      for (const Vec& v : f.vertices)
        if ((v - p).norm() <= 1e-7) fail(ErrorKind::IllPosedLoop, "loop crosses the boundary of a jump facet");
      hits.emplace_back(r, da < 0 ? t.deck_inverse(f.label) : f.label);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [r, e] : hits) g = t.deck_compose(g, e);
  }
  return g;
}

SbvReport sbv_check(const LiftedField& lf, const PiecewiseAffineMap& u) {
  SbvReport r;
  r.cantor_zero = lf.bv.cantor == 0.0;
  r.decomposition_exact = lf.bv.total == lf.bv.ac + lf.bv.jump;
  const CoverTarget& t = *lf.target;
  const Triangulation& tri = u.triangulation();
  for (const auto& e : mesh_edges(tri)) {
    const double dv = t.dist_E(lf.vertex_values.col(e[0]), lf.vertex_values.col(e[1]));
    if (dv >= 0.25 * t.r_inj()) continue;  // edge crosses the jump set
    r.max_lipschitz = std::max(r.max_lipschitz, dv / (tri.vertex(e[0]) - tri.vertex(e[1])).norm());
  }
  r.lipschitz_finite = std::isfinite(r.max_lipschitz) && r.max_lipschitz < 1e12;
  return r;
}

LiftedField lift_pa_field(const PiecewiseAffineMap& u, const Scaffold& s, const LiftConfig& cfg) {
  const CoverTarget& t = s.target();
  const Triangulation& tri = u.triangulation();
  const int d = tri.dim();
  if (u.target_dim() != s.m()) fail(ErrorKind::InvalidArgument, "lift_pa_field: field and target dimensions differ");

  LiftedField lf;
  lf.target = s.target_ptr();
  lf.u_star = cfg.u_star ? *cfg.u_star : default_anchor(u, t);
  if (t.dist_to_N(lf.u_star) > 1e-9) fail(ErrorKind::InvalidArgument, "lift_pa_field: anchor value is not on N");
  const Homotopy h{u, lf.u_star};
  lf.tv_u = u.total_variation();
  lf.selection = select_shift(h, s, cfg.trials, cfg.seed);
  lf.y = lf.selection.y;
  lf.approximate = lf.selection.sets.approximate;
  lf.w_anchor = cfg.w_anchor ? *cfg.w_anchor : t.deck_apply(cfg.anchor_deck, t.any_lift(lf.u_star));
  if (!t.on_E(lf.w_anchor, 1e-9) || (t.project(lf.w_anchor) - lf.u_star).norm() > 1e-9)
    fail(ErrorKind::InvalidArgument, "lift_pa_field: anchor lift does not lie over u_*");
  lf.constants = lift_constants(s, lf.y);
  if (cfg.C_jump_override > 0) lf.constants.C_jump = cfg.C_jump_override;

  // Vertex lifts.
  const std::size_t nv = tri.num_vertices();
  lf.vertex_values.resize(t.ell(), static_cast<Eigen::Index>(nv));
  if (d == 1) {
    // Intervals: continuous path lift from the left end.
    std::vector<int> order(nv);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return tri.vertex(a)(0) < tri.vertex(b)(0); });
    Vec w = cylinder_lift(h, s, lf.y, tri.vertex(order[0]), lf.w_anchor, cfg.path);
    lf.vertex_values.col(order[0]) = w;
    for (std::size_t i = 1; i < nv; ++i) {
      w = path_lift(u, s, lf.y, {tri.vertex(order[i - 1]), tri.vertex(order[i])}, w, cfg.path);
      lf.vertex_values.col(order[i]) = w;
    }
  } else {
    const std::size_t chunks = (nv + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t ch) {
      for (std::size_t v = ch * kChunk; v < std::min(nv, (ch + 1) * kChunk); ++v)
        lf.vertex_values.col(static_cast<Eigen::Index>(v)) =
            cylinder_lift(h, s, lf.y, tri.vertex(static_cast<int>(v)), lf.w_anchor, cfg.path);
    });
  }
  for (std::size_t v = 0; v < nv; ++v) {
    const Vec z = retract_shifted(s, lf.y, u.values().col(static_cast<Eigen::Index>(v)));
    lf.lift_residual =
        std::max(lf.lift_residual, (t.project(lf.vertex_values.col(static_cast<Eigen::Index>(v))) - z).norm());
  }

  // Jump complex.
  if (d >= 2) {
    std::vector<JumpFacet> cand;
    if (lf.approximate) {
      if (d != 2) fail(ErrorKind::InvalidArgument, "lift_pa_field: non-polyhedral singular sets need d = 2");
      for (auto& f : edge_crossing_facets(h, s, lf.y, lf.w_anchor, lf.vertex_values, cfg.path))
        for (auto& g : finish_crossing_facet(t, std::move(f))) {
          if (g.label == t.deck_identity()) ++lf.dropped_facets;
          else lf.facets.push_back(std::move(g));
        }
    } else {
      const auto& T = lf.selection.sets.T;
      for (std::size_t k = 0; k < T.size(); ++k)
        if (auto f = make_facet(T.members()[k].poly, lf.selection.sets.T_simplex[k])) cand.push_back(std::move(*f));
    }
    for (int round = 0; !cand.empty(); ++round) {
      std::vector<std::optional<std::pair<Vec, Vec>>> split(cand.size());
      const std::size_t chunks = (cand.size() + 3) / 4;
      parallel_for(chunks, [&](std::size_t ch) {
        for (std::size_t i = ch * 4; i < std::min(cand.size(), (ch + 1) * 4); ++i) {
          if (facet_looks_trivial(h, s, lf.y, lf.w_anchor, cand[i], cfg.path)) {
            cand[i].label = t.deck_identity();
            continue;
          }
          try {
            jump_traces(h, s, lf.y, lf.w_anchor, cand[i], cfg.facet_samples, cfg.path);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::FacetSplit) throw;
            split[i] = std::make_pair(cand[i].points.front(), cand[i].points.back());
          }
        }
      });
      std::vector<JumpFacet> again;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (split[i]) {
          for (auto& g : split_facet(cand[i], split[i]->first, split[i]->second)) again.push_back(std::move(g));
        } else if (cand[i].label == t.deck_identity()) {
          ++lf.dropped_facets;
        } else {
          lf.facets.push_back(std::move(cand[i]));
        }
      }
      if (!again.empty() && round >= 3)
        fail(ErrorKind::FacetSplit, "jump facet labels stay inconsistent after 3 split rounds");
      lf.split_rounds = again.empty() ? lf.split_rounds : round + 1;
      cand = std::move(again);
    }
  }

  lf.bv = bv_measure(lf, u, s);
  lf.bound_violation = lf.max_jump() > lf.constants.C_jump * (1 + 1e-9);
  if (lf.bound_violation && cfg.strict)
    fail(ErrorKind::BoundViolation, "facet jump " + std::to_string(lf.max_jump()) + " exceeds C_jump " +
                                        std::to_string(lf.constants.C_jump));
  if (cfg.normalize) normalize(lf);
  return lf;
}

nlohmann::json to_json(const LiftedField& lf) {
  const CoverTarget& t = *lf.target;
  using nlohmann::json;
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json facets = json::array();
  std::map<std::string, std::pair<int, double>> table;
  for (const auto& f : lf.facets) {
    json verts = json::array();
    for (const Vec& v : f.vertices) verts.push_back(vec(v));
    facets.push_back({{"simplex", f.simplex},
                      {"label", f.label_name},
                      {"core", f.core},
                      {"measure", f.measure},
                      {"max_jump", f.max_jump},
                      {"jump_integral", f.jump_integral},
                      {"vertices", verts}});
    auto& row = table[f.label_name];
    row.first += 1;
    row.second += f.measure;
  }
  json labels = json::object();
  for (const auto& [name, row] : table) labels[name] = {{"facets", row.first}, {"measure", row.second}};
  const auto& c = lf.constants;
  int certified = 0;
  for (const auto& tr : lf.selection.trials) certified += tr.certificate;
  return {{"target", t.id()},
          {"y", vec(lf.y)},
          {"u_star", vec(lf.u_star)},
          {"w_anchor", vec(lf.w_anchor)},
          {"normalization", t.deck_name(lf.normalization)},
          {"selection",
           {{"trials", lf.selection.trials.size()},
            {"certified", certified},
            {"accepted", lf.selection.accepted},
            {"median_score", lf.selection.median},
            {"approximate", lf.approximate}}},
          {"constants",
           {{"C0", c.C0},
            {"C1", c.C1},
            {"L_corr", c.L_corr},
            {"overlap", c.overlap},
            {"C_grad", c.C_grad},
            {"C_T", c.C_T},
            {"C_jump", c.C_jump},
            {"C_tv", c.C_tv}}},
          {"measures",
           {{"tv_u", lf.tv_u},
            {"ac", lf.bv.ac},
            {"jump", lf.bv.jump},
            {"total", lf.bv.total},
            {"cantor", lf.bv.cantor},
            {"geodesic_jump", lf.bv.geodesic_jump}}},
          {"lift_residual", lf.lift_residual},
          {"max_jump", lf.max_jump()},
          {"bound_violation", lf.bound_violation},
          {"dropped_facets", lf.dropped_facets},
          {"labels", labels},
          {"facets", facets}};
}

void write_geometry(const LiftedField& lf, std::ostream& os) {
  os.precision(17);
  for (const auto& f : lf.facets) {
    os << f.label_name;
    for (const Vec& v : f.vertices)
      for (Eigen::Index k = 0; k < v.size(); ++k) os << ' ' << v(k);
    os << '\n';
  }
}

}  // namespace liftbv
