#ifndef LIFTBV_COVERS_HPP
#define LIFTBV_COVERS_HPP

#include "liftbv/core.hpp"
#include "liftbv/polytope.hpp"

#include <Eigen/Geometry>

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liftbv {

/// Deck transformation. Lattice targets use `shift` (translation by 2*pi*shift);
/// quaternionic targets use `q`, acting on the cover by left multiplication.
struct DeckElement {
  std::array<long long, 2> shift{0, 0};
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();

  friend bool operator==(const DeckElement& a, const DeckElement& b) {
    return a.shift == b.shift && a.q.coeffs() == b.q.coeffs();
  }
};

/// Covering-space target: N embedded in R^m, its universal cover E with
/// coordinates in R^ell, the projection and the deck group.
///
/// Distances on N are the quotient of the cover metric, so pi is a local
/// isometry by construction.
class CoverTarget {
 public:
  virtual ~CoverTarget() = default;

  virtual std::string id() const = 0;
  virtual int m() const = 0;
  virtual int ell() const = 0;

  // --- N side -----------------------------------------------------------
  /// Euclidean distance from z to N in R^m.
  virtual double dist_to_N(const Vec& z) const = 0;
  /// Nearest-point projection; empty on the cut locus.
  virtual std::optional<Vec> nearest_N(const Vec& z) const = 0;
  /// Distance from z to the cut locus of nearest_N.
  virtual double singular_distance(const Vec& z) const = 0;
  /// Polyhedral cut locus clipped to [-M, M]^m, if it is polyhedral.
  virtual std::optional<PolyChain> singular_set(double M) const { (void)M; return std::nullopt; }
  /// Tubular radius: nearest_N is smooth on the open reach-neighbourhood.
  virtual double reach() const = 0;
  /// max |coordinate| over N.
  virtual double extent() const = 0;
  virtual double dist_N(const Vec& a, const Vec& b) const = 0;
  /// Constant-speed minimizing geodesic, s in [0, 1].
  virtual Vec geodesic_N(const Vec& a, const Vec& b, double s) const = 0;
  /// (min, max) of dist_to_N over a box; needed by the grid scaffold.
  virtual std::pair<double, double> box_distance_range(const Vec& lo, const Vec& hi) const;
  virtual Vec sample_N(std::mt19937_64& rng) const = 0;
  virtual Vec base_point() const = 0;

  // --- E side -----------------------------------------------------------
  virtual bool on_E(const Vec& w, double tol = 1e-9) const = 0;
  /// pi : E -> N.
  virtual Vec project(const Vec& w) const = 0;
  /// Some point of the fiber over z.
  virtual Vec any_lift(const Vec& z) const = 0;
  /// Fiber point over z_next closest to w; throws step-too-large at r_inj.
  virtual Vec lift_step(const Vec& w, const Vec& z_next) const;
  virtual double dist_E(const Vec& a, const Vec& b) const = 0;
  /// Isometric Euclidean coordinates of E (ambient-ell norms use these).
  virtual Vec embed_E(const Vec& w) const = 0;
  /// ca*a + cb*b pulled back onto E.
  virtual Vec combine_E(const Vec& a, const Vec& b, double ca, double cb) const { return ca * a + cb * b; }
  virtual Vec sample_E(std::mt19937_64& rng) const = 0;
  virtual double r_inj() const = 0;
  /// Bound on E-length per unit of ambient N-length.
  virtual double kappa() const = 0;
  virtual double diam_E() const = 0;

  // --- deck group -------------------------------------------------------
  virtual bool deck_finite() const = 0;
  virtual DeckElement deck_identity() const { return {}; }
  virtual DeckElement deck_compose(const DeckElement& a, const DeckElement& b) const = 0;
  virtual DeckElement deck_inverse(const DeckElement& a) const = 0;
  virtual Vec deck_apply(const DeckElement& a, const Vec& w) const = 0;
  /// All elements (finite groups) or the generator window [-8, 8].
  virtual std::vector<DeckElement> deck_window() const = 0;
  virtual std::string deck_name(const DeckElement& a) const = 0;
  virtual DeckElement deck_parse(std::string_view name) const = 0;
  /// Unique phi with phi(w1) = w2.
  virtual DeckElement deck_identify(const Vec& w1, const Vec& w2, double tol = 1e-6) const;
  /// phi with phi^{-1}(w) in the fundamental domain.
  virtual DeckElement normalize_to_fundamental_domain(const Vec& w) const = 0;
  virtual bool in_fundamental_domain(const Vec& w, double tol = 1e-9) const = 0;

 protected:
  /// Fiber of z: deck orbit of any_lift(z), restricted to candidates near w.
  virtual std::vector<Vec> fiber_near(const Vec& z, const Vec& w) const = 0;
};

using TargetPtr = std::shared_ptr<const CoverTarget>;

/// Registry keyed by `circle`, `clifford_torus`, `so3`, `so3_mod_v4`.
TargetPtr make_target(std::string_view id);
std::vector<std::string> target_ids();

inline Vec cover_project(const CoverTarget& t, const Vec& w) { return t.project(w); }
inline Vec lift_step(const CoverTarget& t, const Vec& w, const Vec& z_next) { return t.lift_step(w, z_next); }
inline DeckElement deck_identify(const CoverTarget& t, const Vec& w1, const Vec& w2, double tol = 1e-6) {
  return t.deck_identify(w1, w2, tol);
}
inline DeckElement deck_compose(const CoverTarget& t, const DeckElement& a, const DeckElement& b) {
  return t.deck_compose(a, b);
}
inline Vec deck_apply(const CoverTarget& t, const DeckElement& a, const Vec& w) { return t.deck_apply(a, w); }
inline DeckElement normalize_to_fundamental_domain(const CoverTarget& t, const Vec& w) {
  return t.normalize_to_fundamental_domain(w);
}

// Quaternion helpers: E points of quaternionic targets are (w, x, y, z).
inline Eigen::Quaterniond to_quat(const Vec& v) { return Eigen::Quaterniond(v(0), v(1), v(2), v(3)); }
inline Vec from_quat(const Eigen::Quaterniond& q) {
  Vec v(4);
  v << q.w(), q.x(), q.y(), q.z();
  return v;
}

}  // namespace liftbv

#endif  // LIFTBV_COVERS_HPP
