#ifndef LIFTBV_CORE_HPP
#define LIFTBV_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace liftbv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Absolute tolerance for incidence and emptiness decisions in ambient units.
inline constexpr double kGeoEps = 1e-9;

enum class ErrorKind {
  InvalidArgument,
  SingularPoint,
  NearSingular,
  ProjectionFailure,
  ConstructionFailure,
  StepTooLarge,
  NotSameFiber,
  NormalizationFailure,
  SelectionFailure,
  NearJump,
  LiftFailure,
  RefinementNeeded,
  IllPosedLoop,
  FacetSplit,
  BoundViolation,
  IngestError,
};

const char* to_string(ErrorKind kind);

/// Single exception type of the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Worker count: hardware concurrency capped by LIFTBV_THREADS when set.
int worker_count();

/// Runs body(i) for i in [0, n). Results must be written to per-index slots;
/// the first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace liftbv

#endif  // LIFTBV_CORE_HPP
