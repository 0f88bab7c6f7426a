#pragma once

// Dense convex solver behind every attack: finds a point of
//   { y : a y <= b, lower <= y <= upper }
// optionally minimizing 1/2 ||y - target||^2.

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace iomlab::opt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct ConstraintSystem {
  Matrix a;      // r x d, one inequality per row
  Vector b;      // r
  Vector lower;  // d
  Vector upper;  // d

  std::size_t rows() const noexcept { return static_cast<std::size_t>(a.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(a.cols()); }

  /// Throws InvalidInput on shape mismatch, non-finite data, or lower > upper.
  void validate() const;

  /// A system with no inequality rows over the box [lower, upper].
  static ConstraintSystem box(Vector lower, Vector upper);
};

struct Objective {
  enum class Kind { None, MinSquaredNorm, MinSquaredDistanceTo };

  Kind kind = Kind::None;
  Vector target;  // only for MinSquaredDistanceTo

  static Objective none() { return {}; }
  static Objective min_squared_norm() { return {Kind::MinSquaredNorm, {}}; }
  static Objective min_squared_distance_to(Vector target) {
    return {Kind::MinSquaredDistanceTo, std::move(target)};
  }
};

struct SolverSettings {
  double feas_tol = 1e-8;
  double opt_tol = 1e-6;
  int max_iterations = 200;

  /// Defaults overridden by IOMLAB_FEAS_TOL, IOMLAB_OPT_TOL, IOMLAB_MAX_ITER.
  static SolverSettings from_env();
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string_view to_string(SolveStatus status) noexcept;

struct SolveDiagnostics {
  int iterations = 0;
  double max_violation = 0.0;  // independent re-check of the returned point
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  bool phase_one_used = false;
  double phase_one_value = 0.0;  // min over y of the largest scaled violation
  std::string message;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector y;
  SolveDiagnostics diagnostics;

  bool ok() const noexcept { return status == SolveStatus::Optimal; }
};

/// Largest violation of `system` at `y`, rows and box together, in the
/// system's own units. Zero for feasible points.
double max_violation(const ConstraintSystem& system, const Vector& y);

/// Solver backend. Engines must honour the SolveResult contract: Optimal
/// points satisfy max_violation <= feas_tol.
class SolverEngine {
 public:
  virtual ~SolverEngine() = default;
  virtual std::string_view name() const noexcept = 0;
  virtual SolveResult solve(const ConstraintSystem& system,
                            const Objective& objective,
                            const SolverSettings& settings) const = 0;
};

/// Mehrotra predictor-corrector primal-dual interior-point method on the
/// dense normal equations. Rows are scaled to unit norm internally. With no
/// objective the iterates follow the analytic-center path, so feasible
/// answers sit away from the constraint boundaries.
class InteriorPointEngine final : public SolverEngine {
 public:
  std::string_view name() const noexcept override { return "interior-point"; }
  SolveResult solve(const ConstraintSystem& system, const Objective& objective,
                    const SolverSettings& settings) const override;
};

const SolverEngine& default_engine();

SolveResult solve(const ConstraintSystem& system, const Objective& objective,
                  const SolverSettings& settings = {});

}  // namespace iomlab::opt
