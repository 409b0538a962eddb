#ifndef LIFTBV_PIPELINE_HPP
#define LIFTBV_PIPELINE_HPP

#include "liftbv/field.hpp"
#include "liftbv/lift.hpp"

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace liftbv {

struct LoopSpec {
  std::string name;
  std::vector<Vec> points;
  std::string expect;  // empty: record only
};

struct PipelineConfig {
  /// Field file; ignored when `synthetic` is set.
  std::string input;
  std::string synthetic;
  int resolution = 32;
  double lambda = 1.75;
  /// Must match the field's target when non-empty.
  std::string target;

  /// Certified scaffold file; otherwise built from the fields below and audited.
  std::string scaffold_file;
  std::string scaffold_kind;  // "generic" or "analytic"; empty picks by target
  int q = 8;
  double M = 2.0;
  double sigma = 0.25;
  int audit_samples = 500;
  std::uint64_t audit_seed = 7;
  /// Preset constants (C0, C1), e.g. from an earlier audit.
  std::optional<std::pair<double, double>> constants;

  int trials = 16;
  std::uint64_t seed = 1;
  bool strict = true;
  std::optional<Vec> anchor_point;
  std::optional<Vec> anchor_lift;
  std::vector<LoopSpec> loops;
  std::vector<int> refinement;

  double residual_tol = 1e-6;
  double interpolation_tol = 1e-12;
  double refinement_tol = 0.05;
  double C_jump_override = 0.0;

  std::string output_dir;

  static PipelineConfig from_json(const nlohmann::json& j);
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct PipelineReport {
  nlohmann::json body;
  std::vector<CheckResult> checks;
  nlohmann::json timing;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// ingest, interpolate, scaffold, shift selection, lift, measures, checks.
/// Stage errors are rethrown with the stage name prefixed to the message.
PipelineReport run_pipeline(const PipelineConfig& cfg);

/// Process exit status for an error kind: 3 ingest, 2 bound violation, 4 otherwise.
int exit_code_for(ErrorKind kind);

}  // namespace liftbv

#endif  // LIFTBV_PIPELINE_HPP
