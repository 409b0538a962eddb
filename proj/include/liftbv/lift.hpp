#ifndef LIFTBV_LIFT_HPP
#define LIFTBV_LIFT_HPP

#include "liftbv/transversal.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace liftbv {

struct PathOptions {
  /// Largest accepted N-step as a fraction of r_inj.
  double step_fraction = 0.5;
  double min_dt = 1e-12;
  int budget = 200000;
};

/// v(x) = V(0, x): lift of t -> rho_y(U(t, x)) from t = 1, where it starts at w_anchor.
Vec cylinder_lift(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& x, const Vec& w_anchor,
                  const PathOptions& opt = {});

/// Lift of rho_y o u along the polygon pts starting at w0; returns the end point.
Vec path_lift(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y, const std::vector<Vec>& pts,
              const Vec& w0, const PathOptions& opt = {});

/// Deck element of the closed polygon loop obtained by fine-step lifting of rho_y o u.
DeckElement path_lift_monodromy(const PiecewiseAffineMap& u, const Scaffold& s, const Vec& y,
                                const std::vector<Vec>& loop);

struct JumpFacet {
  HPolytope carrier;
  std::vector<Vec> vertices;
  Vec normal;  // v+ lives on the side normal points to
  int simplex = -1;
  /// Stub inside a simplex where a jump curve ends or branches.
  bool core = false;
  double measure = 0.0;
  std::vector<Vec> points;
  std::vector<double> weights;  // quadrature weights, summing to measure
  std::vector<Vec> plus, minus;
  DeckElement label;
  std::string label_name;
  double max_jump = 0.0;
  double jump_integral = 0.0;      // ambient norm of v+ - v-
  double geodesic_integral = 0.0;  // dist_E(v+, v-)

  explicit JumpFacet(int d) : carrier(d) {}
};

struct BVRecord {
  double ac = 0.0;
  double jump = 0.0;
  double total = 0.0;
  double cantor = 0.0;
  double geodesic_jump = 0.0;
};

/// Constants of the bound chain for one scaffold and shift.
struct LiftConstants {
  double C0 = 0.0, C1 = 0.0;
  double L_corr = 0.0;   // Lipschitz constant of (rho(. - y)|N)^{-1}
  int overlap = 1;       // X members meeting one sigma-ball
  double C_grad = 0.0;   // y-averaged gradient factor
  double C_T = 0.0;      // y-averaged shadow factor
  double D = 0.0;        // bound on |u - u_*|
  double C_jump = 0.0;   // per-facet geodesic jump bound
  double C_tv = 0.0;     // |Dv| <= C_tv ||grad u||
};

LiftConstants lift_constants(const Scaffold& s, const Vec& y);

struct LiftConfig {
  int trials = 16;
  std::uint64_t seed = 1;
  std::optional<Vec> u_star;
  /// Applied to any_lift(u_*) to obtain the anchor lift.
  DeckElement anchor_deck;
  /// Explicit anchor lift over u_*; overrides anchor_deck.
  std::optional<Vec> w_anchor;
  int facet_samples = 3;
  bool strict = true;
  bool normalize = true;
  /// Replaces the certified C_jump when positive.
  double C_jump_override = 0.0;
  PathOptions path;
};

struct LiftedField {
  TargetPtr target;
  Vec y;
  Vec u_star;
  Vec w_anchor;
  Mat vertex_values;  // ell x num_vertices
  std::vector<JumpFacet> facets;
  BVRecord bv;
  LiftConstants constants;
  double tv_u = 0.0;
  double lift_residual = 0.0;
  int dropped_facets = 0;
  int split_rounds = 0;
  bool approximate = false;
  bool bound_violation = false;
  DeckElement normalization;
  ShiftSelection selection;

  double max_jump() const;
};

LiftedField lift_pa_field(const PiecewiseAffineMap& u, const Scaffold& s, const LiftConfig& cfg = {});

/// Traces at `samples` points of f: offsets +-eps n, Richardson-extrapolated
/// and snapped to the fiber over rho_y(u(p)). Fills points/plus/minus/label.
void jump_traces(const Homotopy& h, const Scaffold& s, const Vec& y, const Vec& w_anchor, JumpFacet& f,
                 int samples, const PathOptions& opt = {});

/// ac part by order-2 quadrature of |grad v| off the jump set, jump part by facet quadrature.
BVRecord bv_measure(const LiftedField& lf, const PiecewiseAffineMap& u, const Scaffold& s);

/// Moves the lifting into the fundamental domain via the medoid of its values.
void normalize(LiftedField& lf);

/// Ordered product of crossed facet labels along a closed polygon.
DeckElement loop_monodromy(const LiftedField& lf, const std::vector<Vec>& loop);

struct SbvReport {
  bool cantor_zero = false;
  bool decomposition_exact = false;
  double max_lipschitz = 0.0;
  bool lipschitz_finite = false;
  bool passed() const { return cantor_zero && decomposition_exact && lipschitz_finite; }
};

SbvReport sbv_check(const LiftedField& lf, const PiecewiseAffineMap& u);

nlohmann::json to_json(const LiftedField& lf);
/// One line per facet: label, then vertex coordinates.
void write_geometry(const LiftedField& lf, std::ostream& os);

}  // namespace liftbv

#endif  // LIFTBV_LIFT_HPP
