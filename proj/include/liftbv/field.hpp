#ifndef LIFTBV_FIELD_HPP
#define LIFTBV_FIELD_HPP

#include "liftbv/covers.hpp"
#include "liftbv/triangulation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace liftbv {

/// Samples of an N-valued field on the vertices of a regular grid, axis 0 fastest.
struct SampledField {
  std::string target;
  Vec lo, hi;
  std::vector<int> resolution;
  double lambda = 0.0;
  Mat samples;  // m x prod(resolution + 1)
  int clamped = 0;

  std::size_t count() const;
};

/// Parses the field-file format; samples outside [-lambda, lambda]^m are clamped.
SampledField read_field(std::istream& is);
SampledField read_field_file(const std::string& path);
void write_field(const SampledField& f, std::ostream& os);
void write_field_file(const SampledField& f, const std::string& path);

/// Componentwise clamp to [-lambda, lambda]; returns the number of samples moved.
int clamp_samples(Mat& samples, double lambda);

struct Interpolation {
  PiecewiseAffineMap map;
  double total_variation = 0.0;
  /// max |u(vertex) - sample|; zero up to rounding.
  double vertex_residual = 0.0;
};

Interpolation interpolate_pa(const SampledField& f);

/// Synthetic fields on [-1, 1]^d: `vortex` (x/|x|), `smooth` (angle x1 + x2^2/2),
/// `constant`, `two_defect` (so3_mod_v4 with defects A and B), `line` (d = 1 arc).
SampledField synthetic_field(const std::string& kind, int resolution, double lambda);
std::vector<std::string> synthetic_kinds();

/// Defect positions of the two-defect field.
Vec two_defect_A();
Vec two_defect_B();
/// Quaternion lift of the two-defect field: exp(i theta_A / 4) exp(j theta_B / 4),
/// with cuts on the ray left of A and the ray right of B.
Vec two_defect_lift(const Vec& x);

/// Exact integral of |grad(angle)| for the `smooth` field: 2 * int_{-1}^{1} sqrt(1 + a^2) da.
double smooth_field_tv();

}  // namespace liftbv

#endif  // LIFTBV_FIELD_HPP
