#pragma once

#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sysid/least_squares.hpp"
#include "gncbench/sysid/param_vector.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gncbench::sysid {

/// The candidate parameters produced a non-finite or runaway simulation.
class NonFiniteSimulation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The initial guess itself cannot be simulated.
class DivergedSimulation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for parameters that the data cannot determine, when freezing them is
/// disabled or when the remaining normal equations are still rank deficient.
class SingularNormalEquations : public std::runtime_error {
 public:
  SingularNormalEquations(const std::string& what, std::vector<int> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

/// Model-implied IMU readings (ax, ay, gyro) at each record, from a forward
/// simulation of the candidate model started at rest and driven by the logged
/// controls. Throws NonFiniteSimulation for unstable candidates.
std::vector<Vec3> predict_measurements(const ParamVector& p, const KnownInertia& known,
                                       const MissionLog& log);

struct FitOptions {
  /// Huber threshold in units of the per-channel robust residual scale.
  double huber_delta = 1.0;
  /// false gives plain (channel-normalized) least squares.
  bool robust = true;
  int max_iterations = 200;
  double relative_cost_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-6;
  /// Outer passes re-estimating the residual scale from the MAD.
  int max_scale_passes = 4;
  /// Residual scale floor as a fraction of the channel's signal RMS.
  double scale_floor_fraction = 1e-3;
  /// Hold unidentifiable parameters at their initial value instead of throwing.
  bool freeze_unidentifiable = true;
  /// Jacobian columns below this fraction of the largest column norm are null.
  double null_column_tolerance = 1e-9;
};

struct ResidualDiagnostics {
  Vec3 rms = Vec3::Zero();
  Vec3 max_abs = Vec3::Zero();
  /// Robust per-channel scale used to normalize the residuals.
  Vec3 scale = Vec3::Ones();
  /// Fraction of residuals in the linear (down-weighted) Huber branch.
  double downweighted_fraction = 0.0;
};

struct FitReport {
  ParamVector estimate;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  /// Parameters the log cannot determine; held at their initial values.
  std::vector<int> unidentifiable;
  ResidualDiagnostics residuals;
  /// Cost after each accepted iteration.
  std::vector<IterationRecord> history;
};

/// Robust Gauss-Newton fit of (dl, dc, T) to the logged IMU samples.
///
/// Residuals are normalized per channel by a MAD scale and reweighted with the
/// Huber weight (IRLS); the Jacobian comes from central differences and steps
/// use Levenberg-Marquardt damping. Costs are the normalized objective
/// sum rho(r / scale) evaluated with the final scales.
///
/// Parameters tied to a control channel that the log never excites (dl_j,
/// dc_j and column j of T), and parameters with null Jacobian columns, are
/// reported in FitReport::unidentifiable.
FitReport fit_dynamic(const MissionLog& log, const KnownInertia& known, const ParamVector& init,
                      const FitOptions& options = {});

/// Starting point when none is supplied: dl = dc = -1, T = diag(1, 1, inertia/mass).
ParamVector default_initial_guess(const KnownInertia& known);

}  // namespace gncbench::sysid
