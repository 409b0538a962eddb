#ifndef LIFTBV_SCAFFOLD_HPP
#define LIFTBV_SCAFFOLD_HPP

#include "liftbv/covers.hpp"
#include "liftbv/polytope.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace liftbv {

enum class ScaffoldKind { GenericGrid, Analytic };

/// A face of the grid: `fixed` axes sit on grid line `index`, free axes span
/// cell `index`.
struct GridFace {
  std::vector<int> index;
  std::vector<bool> fixed;
  int dim() const;
};

/// Dual-skeleton piece of one non-W cube: the two `free` axes pinned at the
/// cube centre, every other axis on the side given by bit i of `sides`.
struct DualPiece {
  std::int64_t cube = 0;
  int a = 0, b = 1;
  std::uint32_t sides = 0;
};

/// Retraction scaffold: the singular set X together with a retraction rho of
/// the cube [-M, M]^m minus X onto N, plus shifted retractions rho_y.
class Scaffold {
 public:
  ScaffoldKind kind() const { return kind_; }
  const CoverTarget& target() const { return *target_; }
  TargetPtr target_ptr() const { return target_; }
  double M() const { return M_; }
  double sigma() const { return sigma_; }
  double Lambda() const { return M_ - sigma_; }
  int q() const { return q_; }
  int m() const { return target_->m(); }

  /// Certified constants; NaN until audited.
  double C0() const { return C0_; }
  double C1() const { return C1_; }
  void set_constants(double c0, double c1) { C0_ = c0, C1_ = c1; }

  // Generic grid data.
  int cells_per_axis() const { return 2 * q_; }
  double cell_size() const { return M_ / q_; }
  std::size_t num_cubes() const { return in_w_.size(); }
  bool cube_in_W(std::int64_t c) const { return in_w_[static_cast<std::size_t>(c)] != 0; }
  std::vector<std::int64_t> W() const;
  const std::vector<DualPiece>& dual_pieces() const { return pieces_; }
  bool face_in_W(const GridFace& f) const;

  /// X as polytopes; empty optional when X is not polyhedral.
  const std::optional<PolyChain>& X() const { return X_; }
  /// Indices of X members that may meet the box [lo, hi].
  std::vector<std::size_t> X_near(const Vec& lo, const Vec& hi) const;
  bool polyhedral() const { return X_.has_value(); }

  double dist_to_X(const Vec& z) const;
  /// rho(z) for z outside X; rho = rho_W o sigma_m.
  Vec rho(const Vec& z) const;
  /// sigma_j of the cascade; identity on R_1 and on faces of W.
  Vec cascade(int j, const Vec& z) const;

  /// Cube-face lookups made by the most recent cascade on this thread.
  static int last_lookup_count();

  void save(std::ostream& os) const;
  static Scaffold load(std::istream& is);

 private:
  friend Scaffold build_generic_scaffold(TargetPtr, int, double, double);
  friend Scaffold build_analytic_scaffold(TargetPtr, double, double);

  GridFace locate_face(const Vec& z) const;
  Vec edge_value(const GridFace& f, const Vec& z) const;
  Vec vertex_value(const std::vector<int>& grid) const;
  std::int64_t cube_index(const std::vector<int>& cell) const;
  std::vector<int> cube_cell(std::int64_t c) const;
  HPolytope piece_polytope(const DualPiece& p) const;
  double piece_distance(const DualPiece& p, const Vec& z) const;
  void rebuild_pieces();

  ScaffoldKind kind_ = ScaffoldKind::Analytic;
  TargetPtr target_;
  double M_ = 0, sigma_ = 0;
  int q_ = 0;
  double C0_ = std::numeric_limits<double>::quiet_NaN();
  double C1_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<char> in_w_;
  std::vector<DualPiece> pieces_;
  std::optional<PolyChain> X_;
};

/// Grid construction: cubes of side M/q, W = cubes within sigma of N.
/// sigma <= 0 selects the default M/(8q).
Scaffold build_generic_scaffold(TargetPtr target, int q, double M, double sigma = 0.0);

/// Closed-form provider: rho is the nearest-point projection onto N.
Scaffold build_analytic_scaffold(TargetPtr target, double M, double sigma);

/// xi_K: radial retraction of the box [lo, hi] from its centre onto its boundary.
Vec radial_retract(const Vec& lo, const Vec& hi, const Vec& z);

Vec cascade_retract(const Scaffold& s, int j, const Vec& z);

/// rho_y(z) = (rho(. - y) restricted to N)^{-1}(rho(z - y)).
Vec eval_retraction(const Scaffold& s, const Vec& y, const Vec& z);
/// eval_retraction without the domain checks.
Vec retract_shifted(const Scaffold& s, const Vec& y, const Vec& z);

struct AuditReport {
  double identity_residual = 0.0;
  double C0_estimate = 0.0;
  double C0_refined = 0.0;
  bool C0_stable = false;
  double C1_estimate = 0.0;
  double C1_refined = 0.0;
  bool C1_stable = false;
  int segments_used = 0;
  bool ok() const { return C0_stable && C1_stable && identity_residual <= 1e-9; }
};

/// Empirical constants; the certified values are 1.1 times the refined ones.
AuditReport audit_scaffold(const Scaffold& s, int samples, std::uint64_t seed);
void certify(Scaffold& s, const AuditReport& r);

/// Arclength of rho o segment, refined until the increment is below tol.
double segment_image_length(const Scaffold& s, const Vec& a, const Vec& b, double tol);

}  // namespace liftbv

#endif  // LIFTBV_SCAFFOLD_HPP
