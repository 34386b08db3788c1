#pragma once

#include "gncbench/dynamics/types.hpp"
#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"

#include <cstdint>

namespace gncbench {

/// Noise-free IMU reading (ax, ay, gyro_z) for a given body acceleration and twist.
inline Vec3 ideal_measurement(const BodyAccel& accel, const BodyVelocity& vel) {
  return {accel.ax, accel.ay, vel.vpsi};
}

/// IMU reading at `state` under `u`: the model acceleration and yaw rate plus a
/// zero-mean Gaussian draw with covariance `noise.q_meas`. Deterministic in
/// `seed`.
SensorSample sense(const DynamicParams& params, const VehicleState& state,
                   const ControlAction& u, const NoiseModel& noise, std::uint64_t seed,
                   double t = 0.0);

}  // namespace gncbench
