#pragma once

#include "gncbench/ekf/ekf.hpp"
#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"

#include <cstdint>

namespace gncbench::gnc {

struct VehicleSetup {
  DynamicParams plant;
  NoiseModel plant_noise;
  /// Model and noise used by the filter. Usually the identified ones.
  DynamicParams model;
  NoiseModel filter_noise;
  std::uint64_t seed = 1;
  VehicleState initial;
  double dt = 0.01;
  /// Controllers see the true state; the filter is not run.
  bool perfect_state = false;
};

/// Simulated vehicle with IMU and EKF, advanced one control tick at a time.
///
/// Tick k: the controller reads the navigation solution (pose_k dead-reckoned
/// with mu_{k-1}), the IMU samples state_k under u_k, the filter predicts with
/// u_k and updates, then the plant advances to state_{k+1}. Sensor and process
/// noise come from the same streams as run_mission(), so an open-loop command
/// sequence yields the same records.
class SimVehicle {
 public:
  explicit SimVehicle(const VehicleSetup& setup);

  /// Pose and twist the controller should use at the current tick.
  Pose nav_pose() const;
  BodyVelocity nav_velocity() const;

  /// Dead-reckoned pose and filter belief, regardless of perfect_state.
  const Pose& estimated_pose() const { return est_pose_; }
  const ekf::EkfState& filter() const { return filter_; }
  const VehicleState& truth() const { return state_; }
  /// Innovation of the latest filter update; zero before the first tick.
  const Vec3& last_innovation() const { return innovation_; }

  double time() const { return static_cast<double>(tick_) * setup_.dt; }
  long tick_index() const { return tick_; }

  /// Applies `u` for one tick and returns the log record of this tick.
  LogRecord tick(const ControlAction& u);

 private:
  VehicleSetup setup_;
  Rng sensor_rng_;
  Rng process_rng_;
  GaussianSampler<3> sensor_noise_;
  GaussianSampler<3> process_noise_;
  VehicleState state_;
  ekf::EkfState filter_;
  Pose est_pose_;
  Vec3 innovation_ = Vec3::Zero();
  long tick_ = 0;
};

}  // namespace gncbench::gnc
