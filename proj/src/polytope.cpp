#include "liftbv/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace liftbv {

namespace {

constexpr double kPivotTol = 1e-11;

// Tableau simplex on  max obj.v  s.t.  T[:, :ncols] v = T[:, ncols], v >= 0.
// `basis[r]` is the basic column of row r. Columns flagged in `frozen` never enter.
enum class SimplexOutcome { Optimal, Unbounded };

SimplexOutcome run_simplex(Mat& T, std::vector<int>& basis, const std::vector<char>& frozen) {
  const Eigen::Index rows = T.rows() - 1;
  const Eigen::Index ncols = T.cols() - 1;
  for (int iter = 0; iter < 50000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < ncols; ++j) {
      if (!frozen[j] && T(rows, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return SimplexOutcome::Optimal;
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double a = T(r, enter);
      if (a > kPivotTol) {
        const double ratio = T(r, ncols) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return SimplexOutcome::Unbounded;
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= rows; ++r) {
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    }
    basis[leave] = static_cast<int>(enter);
  }
  fail(ErrorKind::InvalidArgument, "simplex iteration limit reached");
}

Vec normalized_row(const Eigen::Ref<const Vec>& a, double& rhs) {
  const double n = a.norm();
  rhs /= n;
  return a / n;
}

bool row_is_zero(const Eigen::Ref<const Vec>& a) { return a.lpNorm<Eigen::Infinity>() <= 1e-13; }

}  // namespace

LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b, const Mat& E, const Vec& f) {
  const Eigen::Index n = c.size();
  const Eigen::Index p = A.rows();
  const Eigen::Index q = E.rows();
  const Eigen::Index rows = p + q;
  // Columns: x+ (n), x- (n), slacks (p), artificials (rows), rhs.
  const Eigen::Index art0 = 2 * n + p;
  const Eigen::Index ncols = art0 + rows;
  Mat T = Mat::Zero(rows + 1, ncols + 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double scale = std::max(A.row(i).lpNorm<Eigen::Infinity>(), 1e-300);
    T.block(i, 0, 1, n) = A.row(i) / scale;
    T.block(i, n, 1, n) = -A.row(i) / scale;
    T(i, 2 * n + i) = 1.0;
    T(i, ncols) = b(i) / scale;
  }
  for (Eigen::Index i = 0; i < q; ++i) {
    const double scale = std::max(E.row(i).lpNorm<Eigen::Infinity>(), 1e-300);
    T.block(p + i, 0, 1, n) = E.row(i) / scale;
    T.block(p + i, n, 1, n) = -E.row(i) / scale;
    T(p + i, ncols) = f(i) / scale;
  }
  std::vector<int> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (T(r, ncols) < 0) T.row(r).head(art0) *= -1.0, T(r, ncols) *= -1.0;
    T(r, art0 + r) = 1.0;
    basis[static_cast<std::size_t>(r)] = static_cast<int>(art0 + r);
  }

  // Phase 1: maximize -sum(artificials).
  std::vector<char> frozen(static_cast<std::size_t>(ncols), 0);
  T.row(rows).setZero();
  for (Eigen::Index r = 0; r < rows; ++r) T.row(rows) -= T.row(r);
  for (Eigen::Index r = 0; r < rows; ++r) T(rows, art0 + r) = 0.0;
  run_simplex(T, basis, frozen);
  LpResult result;
  if (T(rows, ncols) < -1e-9) {
    result.status = LpResult::Status::Infeasible;
    return result;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (basis[static_cast<std::size_t>(r)] < art0) continue;
    for (Eigen::Index j = 0; j < art0; ++j) {
      if (std::abs(T(r, j)) > 1e-9) {
        T.row(r) /= T(r, j);
        for (Eigen::Index k = 0; k <= rows; ++k)
          if (k != r && T(k, j) != 0.0) T.row(k) -= T(k, j) * T.row(r);
        basis[static_cast<std::size_t>(r)] = static_cast<int>(j);
        break;
      }
    }
  }
  for (Eigen::Index j = art0; j < ncols; ++j) frozen[static_cast<std::size_t>(j)] = 1;

  // Phase 2.
  T.row(rows).setZero();
  T.block(rows, 0, 1, n) = -c.transpose();
  T.block(rows, n, 1, n) = c.transpose();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int j = basis[static_cast<std::size_t>(r)];
    if (T(rows, j) != 0.0) T.row(rows) -= T(rows, j) * T.row(r);
  }
  if (run_simplex(T, basis, frozen) == SimplexOutcome::Unbounded) {
    result.status = LpResult::Status::Unbounded;
    return result;
  }
  Vec v = Vec::Zero(ncols);
  for (Eigen::Index r = 0; r < rows; ++r) v(basis[static_cast<std::size_t>(r)]) = T(r, ncols);
  result.status = LpResult::Status::Optimal;
  result.x = v.head(n) - v.segment(n, n);
  result.value = c.dot(result.x);
  return result;
}

HPolytope::HPolytope(int dim) : dim_(dim), A_(0, dim), b_(0), E_(0, dim), f_(0) {}

HPolytope::HPolytope(Mat A, Vec b) : HPolytope(std::move(A), std::move(b), Mat(0, 0), Vec(0)) {}

HPolytope::HPolytope(Mat A, Vec b, Mat E, Vec f) {
  dim_ = static_cast<int>(std::max(A.cols(), E.cols()));
  if (A.rows() != b.size() || E.rows() != f.size())
    fail(ErrorKind::InvalidArgument, "polytope row/rhs size mismatch");
  if (A.rows() == 0) A.resize(0, dim_);
  if (E.rows() == 0) E.resize(0, dim_);
  if (A.cols() != dim_ || E.cols() != dim_) fail(ErrorKind::InvalidArgument, "polytope column mismatch");
  A_.resize(A.rows(), dim_);
  b_.resize(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (row_is_zero(A.row(i).transpose())) fail(ErrorKind::InvalidArgument, "zero inequality normal");
    double rhs = b(i);
    A_.row(i) = normalized_row(A.row(i).transpose(), rhs).transpose();
    b_(i) = rhs;
  }
  E_.resize(E.rows(), dim_);
  f_.resize(E.rows());
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    if (row_is_zero(E.row(i).transpose())) fail(ErrorKind::InvalidArgument, "zero equality normal");
    double rhs = f(i);
    E_.row(i) = normalized_row(E.row(i).transpose(), rhs).transpose();
    f_(i) = rhs;
  }
  empty_ = lp_maximize(Vec::Zero(dim_), A_, b_, E_, f_).status == LpResult::Status::Infeasible;
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
  const Eigen::Index n = lo.size();
  Mat A = Mat::Zero(2 * n, n);
  Vec b(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    A(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return HPolytope(A, b);
}

HPolytope HPolytope::empty(int dim) {
  Mat A = Mat::Zero(2, dim);
  A(0, 0) = 1.0;
  A(1, 0) = -1.0;
  Vec b(2);
  b << -1.0, -1.0;
  return HPolytope(A, b);
}

HPolytope HPolytope::point(const Vec& p) {
  return HPolytope(Mat(0, p.size()), Vec(0), Mat::Identity(p.size(), p.size()), p);
}

HPolytope HPolytope::segment(const Vec& p, const Vec& q) {
  const Eigen::Index n = p.size();
  const Vec d = q - p;
  if (d.norm() == 0.0) return point(p);
  // Equalities: components orthogonal to d vanish relative to p.
  Eigen::JacobiSVD<Mat> svd(d.transpose(), Eigen::ComputeFullV);
  const Mat perp = svd.matrixV().rightCols(n - 1).transpose();
  Mat A(2, n);
  A.row(0) = d.transpose();
  A.row(1) = -d.transpose();
  Vec b(2);
  b << d.dot(q), -d.dot(p);
  return HPolytope(A, b, perp, perp * p);
}

bool HPolytope::contains(const Eigen::Ref<const Vec>& x, double tol) const {
  if (empty_) return false;
  if (A_.rows() > 0 && ((A_ * x - b_).array() > tol).any()) return false;
  if (E_.rows() > 0 && ((E_ * x - f_).array().abs() > tol).any()) return false;
  return true;
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
  if (other.dim_ != dim_) fail(ErrorKind::InvalidArgument, "intersect: dimension mismatch");
  Mat A(A_.rows() + other.A_.rows(), dim_);
  A << A_, other.A_;
  Vec b(b_.size() + other.b_.size());
  b << b_, other.b_;
  Mat E(E_.rows() + other.E_.rows(), dim_);
  E << E_, other.E_;
  Vec f(f_.size() + other.f_.size());
  f << f_, other.f_;
  return HPolytope(A, b, E, f);
}

HPolytope fm_project(const HPolytope& P, int axis) {
  const int n = P.dim();
  if (n < 2) fail(ErrorKind::InvalidArgument, "fm_project needs ambient dimension >= 2");
  if (axis < 0 || axis >= n) fail(ErrorKind::InvalidArgument, "fm_project: axis out of range");
  if (P.is_empty()) return HPolytope::empty(n - 1);

  Mat A = P.A();
  Vec b = P.b();
  Mat E = P.E();
  Vec f = P.f();

  // Prefer exact substitution through an equality that involves the axis.
  Eigen::Index pivot = -1;
  double best = 1e-9;
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    if (std::abs(E(i, axis)) > best) {
      best = std::abs(E(i, axis));
      pivot = i;
    }
  }

  std::vector<Vec> ineq_rows;
  std::vector<double> ineq_rhs;
  std::vector<Vec> eq_rows;
  std::vector<double> eq_rhs;
  auto drop_axis = [&](const Vec& row) {
    Vec out(n - 1);
    out << row.head(axis), row.tail(n - 1 - axis);
    return out;
  };

  if (pivot >= 0) {
    const Vec e = E.row(pivot).transpose();
    const double fe = f(pivot);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double k = A(i, axis) / e(axis);
      ineq_rows.push_back(drop_axis(A.row(i).transpose() - k * e));
      ineq_rhs.push_back(b(i) - k * fe);
    }
    for (Eigen::Index i = 0; i < E.rows(); ++i) {
      if (i == pivot) continue;
      const double k = E(i, axis) / e(axis);
      eq_rows.push_back(drop_axis(E.row(i).transpose() - k * e));
      eq_rhs.push_back(f(i) - k * fe);
    }
  } else {
    for (Eigen::Index i = 0; i < E.rows(); ++i) {
      eq_rows.push_back(drop_axis(E.row(i).transpose()));
      eq_rhs.push_back(f(i));
    }
    std::vector<Eigen::Index> pos, neg;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double a = A(i, axis);
      if (a > 1e-12)
        pos.push_back(i);
      else if (a < -1e-12)
        neg.push_back(i);
      else {
        ineq_rows.push_back(drop_axis(A.row(i).transpose()));
        ineq_rhs.push_back(b(i));
      }
    }
    for (auto ip : pos) {
      for (auto in : neg) {
        const double lp = A(ip, axis);
        const double ln = -A(in, axis);
        ineq_rows.push_back(drop_axis(ln * A.row(ip).transpose() + lp * A.row(in).transpose()));
        ineq_rhs.push_back(ln * b(ip) + lp * b(in));
      }
    }
  }

  // Clean degenerate rows; a violated trivial row means the shadow is empty.
  std::vector<Vec> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < ineq_rows.size(); ++i) {
    const double norm = ineq_rows[i].norm();
    if (norm <= 1e-12) {
      if (ineq_rhs[i] < -kGeoEps) return HPolytope::empty(n - 1);
      continue;
    }
    Vec r = ineq_rows[i] / norm;
    double c = ineq_rhs[i] / norm;
    bool merged = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if ((rows[k] - r).norm() <= 1e-12) {
        rhs[k] = std::min(rhs[k], c);
        merged = true;
        break;
      }
    }
    if (!merged) {
      rows.push_back(std::move(r));
      rhs.push_back(c);
    }
  }
  std::vector<Vec> erows;
  std::vector<double> erhs;
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    const double norm = eq_rows[i].norm();
    if (norm <= 1e-12) {
      if (std::abs(eq_rhs[i]) > kGeoEps) return HPolytope::empty(n - 1);
      continue;
    }
    erows.push_back(eq_rows[i] / norm);
    erhs.push_back(eq_rhs[i] / norm);
  }
  Mat Eo(static_cast<Eigen::Index>(erows.size()), n - 1);
  Vec fo(static_cast<Eigen::Index>(erows.size()));
  for (std::size_t i = 0; i < erows.size(); ++i) {
    Eo.row(static_cast<Eigen::Index>(i)) = erows[i].transpose();
    fo(static_cast<Eigen::Index>(i)) = erhs[i];
  }

  // Redundancy pruning: drop a row when the others already bound it.
  std::vector<char> keep(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (k != i && keep[k]) others.push_back(k);
    Mat Ao(static_cast<Eigen::Index>(others.size()), n - 1);
    Vec bo(static_cast<Eigen::Index>(others.size()));
    for (std::size_t k = 0; k < others.size(); ++k) {
      Ao.row(static_cast<Eigen::Index>(k)) = rows[others[k]].transpose();
      bo(static_cast<Eigen::Index>(k)) = rhs[others[k]];
    }
    const LpResult r = lp_maximize(rows[i], Ao, bo, Eo, fo);
    if (r.status == LpResult::Status::Infeasible) return HPolytope::empty(n - 1);
    if (r.status == LpResult::Status::Optimal && r.value <= rhs[i] + 1e-10) keep[i] = 0;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (keep[i]) kept.push_back(i);
  Mat Ao(static_cast<Eigen::Index>(kept.size()), n - 1);
  Vec bo(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    Ao.row(static_cast<Eigen::Index>(k)) = rows[kept[k]].transpose();
    bo(static_cast<Eigen::Index>(k)) = rhs[kept[k]];
  }
  return HPolytope(Ao, bo, Eo, fo);
}

std::vector<Vec> vertices(const HPolytope& P) {
  std::vector<Vec> out;
  if (P.is_empty()) return out;
  const int n = P.dim();
  const Mat& A = P.A();
  const Vec& b = P.b();
  const Mat& E = P.E();
  const Vec& f = P.f();

  // Keep an independent subset of equalities.
  Mat Eind(0, n);
  Vec find(0);
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    Mat trial(Eind.rows() + 1, n);
    trial << Eind, E.row(i);
    Eigen::FullPivLU<Mat> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      Eind = trial;
      find.conservativeResize(find.size() + 1);
      find(find.size() - 1) = f(i);
    }
  }
  const int need = n - static_cast<int>(Eind.rows());
  const int m = static_cast<int>(A.rows());
  if (need < 0) return out;
  if (need > m) fail(ErrorKind::InvalidArgument, "vertices: polytope is unbounded");

  double combos = 1.0;
  for (int i = 0; i < need; ++i) combos = combos * (m - i) / (i + 1);
  if (combos > 5e6) fail(ErrorKind::InvalidArgument, "vertices: too many constraint combinations");

  std::vector<int> idx(static_cast<std::size_t>(need));
  std::iota(idx.begin(), idx.end(), 0);
  Mat S(n, n);
  Vec r(n);
  const double scale = 1.0 + (b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0) +
                       (find.size() > 0 ? find.cwiseAbs().maxCoeff() : 0.0);
  const double tol = 1e-9 * scale;
  for (;;) {
    S.topRows(Eind.rows()) = Eind;
    r.head(Eind.rows()) = find;
    for (int k = 0; k < need; ++k) {
      S.row(Eind.rows() + k) = A.row(idx[static_cast<std::size_t>(k)]);
      r(Eind.rows() + k) = b(idx[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Mat> lu(S);
    lu.setThreshold(1e-10);
    if (lu.rank() == n) {
      const Vec x = lu.solve(r);
      if (P.contains(x, tol)) {
        bool dup = false;
        for (const auto& v : out)
          if ((v - x).norm() <= 10 * tol) {
            dup = true;
            break;
          }
        if (!dup) out.push_back(x);
      }
    }
    // Next combination.
    int k = need - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - need + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < need; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  if (out.empty()) {
    // Non-empty but no vertex: the polytope contains a line.
    fail(ErrorKind::InvalidArgument, "vertices: polytope is unbounded");
  }
  for (int axis = 0; axis < n; ++axis) {
    Vec c = Vec::Zero(n);
    c(axis) = 1.0;
    if (lp_maximize(c, A, b, E, f).status == LpResult::Status::Unbounded ||
        lp_maximize(-c, A, b, E, f).status == LpResult::Status::Unbounded)
      fail(ErrorKind::InvalidArgument, "vertices: polytope is unbounded");
  }
  return out;
}

int affine_dim(const std::vector<Vec>& pts, double tol) {
  if (pts.empty()) return -1;
  if (pts.size() == 1) return 0;
  Mat D(pts[0].size(), static_cast<Eigen::Index>(pts.size() - 1));
  double scale = 1.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    D.col(static_cast<Eigen::Index>(i - 1)) = pts[i] - pts[0];
    scale = std::max(scale, D.col(static_cast<Eigen::Index>(i - 1)).norm());
  }
  Eigen::JacobiSVD<Mat> svd(D);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * scale) ++rank;
  return rank;
}

int affine_dim(const HPolytope& P) { return affine_dim(vertices(P)); }

namespace {

// Orthonormal basis (columns) of the affine hull directions of a point set.
Mat hull_basis(const std::vector<Vec>& pts, int j) {
  Mat D(pts[0].size(), static_cast<Eigen::Index>(pts.size() - 1));
  for (std::size_t i = 1; i < pts.size(); ++i) D.col(static_cast<Eigen::Index>(i - 1)) = pts[i] - pts[0];
  Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(j);
}

double polygon_area(std::vector<Vec2> p) {
  // Monotone chain hull, then shoelace.
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * std::abs(area);
}

// Measure of conv(pts) inside its own j-dimensional hull by the facet-pyramid
// decomposition: vol_j = sum over facets of height * vol_{j-1}(facet) / j.
double pyramid_measure(const std::vector<Vec>& pts, int j) {
  if (j == 0) return 1.0;
  const Mat B = hull_basis(pts, j);
  std::vector<Vec> local;
  local.reserve(pts.size());
  for (const auto& p : pts) local.push_back(B.transpose() * (p - pts[0]));
  if (j == 1) {
    double lo = local[0](0), hi = local[0](0);
    for (const auto& p : local) lo = std::min(lo, p(0)), hi = std::max(hi, p(0));
    return hi - lo;
  }
  if (j == 2) {
    std::vector<Vec2> p2;
    for (const auto& p : local) p2.emplace_back(p(0), p(1));
    return polygon_area(std::move(p2));
  }
  // j >= 3: enumerate supporting hyperplanes through j points (desk-scale only).
  const std::size_t n = local.size();
  Vec centroid = Vec::Zero(j);
  for (const auto& p : local) centroid += p;
  centroid /= static_cast<double>(n);
  std::set<std::vector<std::size_t>> seen;
  double total = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(j));
  std::iota(idx.begin(), idx.end(), 0);
  double scale = 1.0;
  for (const auto& p : local) scale = std::max(scale, p.norm());
  const double tol = 1e-9 * scale;
  for (;;) {
    Mat D(j, j - 1);
    for (int k = 1; k < j; ++k) D.col(k - 1) = local[idx[static_cast<std::size_t>(k)]] - local[idx[0]];
    Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullU);
    if (svd.singularValues().minCoeff() > tol) {
      const Vec normal = svd.matrixU().col(j - 1);
      const double off = normal.dot(local[idx[0]]);
      bool above = false, below = false;
      std::vector<std::size_t> on;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = normal.dot(local[i]) - off;
        if (s > tol) above = true;
        else if (s < -tol) below = true;
        else on.push_back(i);
      }
      if (!(above && below) && seen.insert(on).second) {
        std::vector<Vec> facet;
        for (auto i : on) facet.push_back(local[i]);
        total += std::abs(normal.dot(centroid) - off) * pyramid_measure(facet, j - 1) / j;
      }
    }
    int k = j - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - static_cast<std::size_t>(j) + static_cast<std::size_t>(k)) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int t = k + 1; t < j; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
  return total;
}

}  // namespace

double hull_measure(const std::vector<Vec>& pts, int j) {
  if (affine_dim(pts) != j) fail(ErrorKind::InvalidArgument, "hull_measure: dimension mismatch");
  return pyramid_measure(pts, j);
}

double haus_measure(const HPolytope& P, int j) {
  const std::vector<Vec> pts = vertices(P);
  if (affine_dim(pts) != j)
    fail(ErrorKind::InvalidArgument,
         "haus_measure: intrinsic dimension " + std::to_string(affine_dim(pts)) + " != " + std::to_string(j));
  return pyramid_measure(pts, j);
}

void PolyChain::add(HPolytope poly, int tag) {
  if (poly.dim() != ambient_) fail(ErrorKind::InvalidArgument, "PolyChain: ambient dimension mismatch");
  members_.push_back({std::move(poly), tag});
}

}  // namespace liftbv
