#pragma once

#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"

#include <cstdint>
#include <vector>

namespace gncbench {

struct MissionOptions {
  VehicleState initial;
  double t0 = 0.0;
};

/// Steps the plant through `controls`, one record per control. Record k holds
/// the state at t_k, the acceleration under u_k (including the process-noise
/// draw for that step) and the IMU sample derived from them. Process noise is
/// drawn from the acceleration block of `noise.r_model` and held over each
/// step. Throws NonFiniteState carrying the failing step index.
MissionLog run_mission(const DynamicParams& params, const NoiseModel& noise,
                       const std::vector<ControlAction>& controls, double dt, std::uint64_t seed,
                       const MissionOptions& options = {});

/// Acceleration block (rows/cols 3..5) of a 6x6 model covariance.
inline Mat3 accel_block(const Mat6& r) { return r.bottomRightCorner<3, 3>(); }

}  // namespace gncbench
