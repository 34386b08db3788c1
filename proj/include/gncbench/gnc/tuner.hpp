#pragma once

#include "gncbench/gnc/pd_controller.hpp"
#include "gncbench/gnc/trajectory.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gncbench::gnc {

class InfeasibleTrajectory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Box over (alpha, beta, gamma).
struct GainSearchSpace {
  Vec3 lower{0.0, 0.0, 0.0};
  Vec3 upper{100.0, 200.0, 200.0};
  int grid_points = 7;
  int refinements = 6;
};

struct TuneOptions {
  double dt = 0.01;
  double huber_delta = 0.1;
  /// Reference speeds above this fraction of the saturated terminal speed are
  /// rejected as infeasible.
  double speed_margin = 1.0;
  /// A closed loop whose position error exceeds this is treated as unbounded.
  double divergence_bound = 1e3;
};

struct ClosedLoopResult {
  double cost = 0.0;
  double rms_position_error = 0.0;
  double max_position_error = 0.0;
  bool bounded = true;
};

/// Simulates the PD loop on `traj` with perfect state feedback from the first
/// reference sample. Cost is sum_t huber(|eta_ref(t) - eta(t)|).
ClosedLoopResult simulate_tracking(const DynamicParams& params, const ReferenceTrajectory& traj,
                                   const PdGains& gains, const TuneOptions& opts = {});

struct TuneResult {
  PdGains gains;
  ClosedLoopResult best;
  std::size_t evaluations = 0;
  /// RMS sway velocity demanded by the reference; the plant cannot produce it.
  double lateral_demand_rms = 0.0;
  /// Every evaluated candidate and its cost, in evaluation order.
  std::vector<std::pair<PdGains, double>> candidates;
};

/// Terminal body speeds (surge, sway, yaw) under full saturated command on each axis.
Vec3 terminal_speeds(const DynamicParams& params);

/// Coordinate-descent grid refinement of the tracking cost over `space`.
/// Deterministic. Throws InfeasibleTrajectory when the reference exceeds
/// the plant's terminal speeds or no candidate keeps the error bounded.
TuneResult tune_gains(const DynamicParams& params, const ReferenceTrajectory& traj,
                      const GainSearchSpace& space = {}, const TuneOptions& opts = {});

/// Hold-position recovery from a surge and heading offset; true when the
/// error has shrunk below a tenth of its initial value after `duration`.
bool stabilizes(const DynamicParams& params, const PdGains& gains, double duration = 60.0,
                double dt = 0.01);

}  // namespace gncbench::gnc
