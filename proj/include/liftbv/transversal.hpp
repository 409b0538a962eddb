#ifndef LIFTBV_TRANSVERSAL_HPP
#define LIFTBV_TRANSVERSAL_HPP

#include "liftbv/scaffold.hpp"
#include "liftbv/triangulation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace liftbv {

/// U(t, x) = (1 - t) u(x) + t u_*.
struct Homotopy {
  const PiecewiseAffineMap& u;
  Vec u_star;

  Vec eval(double t, const Vec& x) const { return (1 - t) * u.eval(x) + t * u_star; }
};

/// N-point nearest the mean of the vertex values (first value if the mean is singular).
Vec default_anchor(const PiecewiseAffineMap& u, const CoverTarget& t);

/// S_y = (u - y)^{-1}(X) and T_y = shadow of (U - y)^{-1}(X), per simplex.
struct SingularSets {
  Vec y;
  PolyChain S;
  PolyChain T;
  std::vector<int> S_simplex;
  std::vector<int> T_simplex;
  std::vector<int> T_member;
  double T_measure = 0.0;
  bool certificate = false;
  bool approximate = false;
  std::string reason;

  explicit SingularSets(int d = 2) : S(d, d - 2), T(d, d - 1) {}
};

/// Distance below which a vertex value counts as degenerate for a shift.
double conditioning_margin(const Scaffold& s);

SingularSets singular_sets(const Homotopy& h, const Scaffold& s, const Vec& y);

/// Does {U(r, x) - y : r in [t, 1]} meet X?
bool in_forbidden_set(const Homotopy& h, const Scaffold& s, const Vec& y, double t, const Vec& x);

/// ||grad(rho_y o u)||_{L^1}; order 1 uses centroids, order 2 the simplex rule.
double retracted_gradient_l1(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y, int order = 1);

/// Integral of |u - u_*| |grad u|.
double anchor_weighted_variation(const PiecewiseAffineMap& u, const Vec& u_star);

struct ShiftTrial {
  Vec y;
  double grad_l1 = 0.0;
  double T_measure = 0.0;
  double score = 0.0;
  bool certificate = false;
  std::string reason;
};

struct ShiftSelection {
  Vec y;
  SingularSets sets;
  std::vector<ShiftTrial> trials;
  int accepted = -1;
  double median = 0.0;
};

/// Uniform draws from the sigma-ball; the first certified draw whose score
/// is at most twice the median certified score wins.
ShiftSelection select_shift(const Homotopy& h, const Scaffold& s, int trials, std::uint64_t seed);

struct CoareaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Numerical check of the coarea bound for v(x) = B x + c on the box [lo, hi].
CoareaCheck coarea_bound_check(const Mat& B, const Vec& c, const Vec& v_star, const Vec& lo, const Vec& hi,
                               int resolution);

struct AveragedBounds {
  int shifts = 0;
  int certified = 0;
  double tv_u = 0.0;
  double weighted_variation = 0.0;
  double mean_grad = 0.0;
  double mean_T = 0.0;
  double mean_grad_doubled = 0.0;
  double mean_T_doubled = 0.0;
  double grad_ratio() const { return mean_grad_doubled / tv_u; }
  double T_ratio() const { return weighted_variation > 0 ? mean_T_doubled / weighted_variation : 0.0; }
  bool stable(double rel = 0.10) const;
};

/// Means of ||grad(rho_y o u)|| and H^{d-1}(T_y) over `shifts` and 2*`shifts` draws.
AveragedBounds averaged_bounds(const Homotopy& h, const Scaffold& s, int shifts, std::uint64_t seed);

}  // namespace liftbv

#endif  // LIFTBV_TRANSVERSAL_HPP
