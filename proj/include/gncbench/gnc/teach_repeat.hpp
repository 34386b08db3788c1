#pragma once

#include "gncbench/gnc/closed_loop.hpp"
#include "gncbench/gnc/pd_controller.hpp"
#include "gncbench/gnc/trajectory.hpp"

#include <stdexcept>
#include <vector>

namespace gncbench::gnc {

struct ControlSample {
  double t = 0.0;
  ControlAction u;
};

/// Which belief is written into a taught trajectory.
enum class TeachSource { truth, estimate };

struct TeachResult {
  ReferenceTrajectory trajectory;
  MissionLog log;
};

/// Drives `vehicle` with the control stream, recording one sample per
/// control at the control's timestamp, before that control is applied.
/// Streams must be sampled at the vehicle's dt.
TeachResult teach(SimVehicle& vehicle, const std::vector<ControlSample>& stream,
                  TeachSource source = TeachSource::truth);

class TrackingDiverged : public std::runtime_error {
 public:
  TrackingDiverged(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

struct RepeatOptions {
  bool loop = false;
  /// Laps to run when looping; 0 or less loops until stopped (Repeater only).
  int laps = 1;
  double blend_s = 1.0;
  /// Abort bound on the distance between the navigation pose and the path.
  double abort_cross_track = 5.0;
};

/// Reference seen at `elapsed` seconds into a repeat. With `loop`, time wraps
/// modulo the trajectory duration. Over the first `blend_s` of each later lap
/// the offset between the path's end and start fades linearly to zero, so the
/// reference leaves the wrap at path speed.
TrajectorySample reference_at(const ReferenceTrajectory& traj, double elapsed,
                              const RepeatOptions& opts);

struct RepeatStep {
  double t = 0.0;
  TrajectorySample ref;
  ControlAction u;
  Pose nav_pose;
  BodyVelocity nav_vel;
  VehicleState truth;
  double cross_track = 0.0;
};

struct RepeatReport {
  std::vector<RepeatStep> steps;
  MissionLog log;
  double velocity_rmse = 0.0;     // navigation twist vs true twist
  double cross_track_rms = 0.0;   // navigation pose vs reference path
  double tracking_rmse = 0.0;     // true twist vs reference twist
  double final_drift = 0.0;       // |estimated - true| position at the end
  double max_drift = 0.0;
};

/// Per-tick repeat guidance: reference lookup, cross-track check and PD law.
class Repeater {
 public:
  /// `t0` is the vehicle time at which the repeat starts.
  Repeater(ReferenceTrajectory traj, const PdGains& gains, const RepeatOptions& opts, double t0);

  const ReferenceTrajectory& trajectory() const { return traj_; }
  /// True once a non-looping repeat has covered the whole trajectory.
  bool finished(double t) const;
  /// Command for the vehicle's current tick. Throws TrackingDiverged.
  RepeatStep command(const SimVehicle& vehicle) const;

 private:
  ReferenceTrajectory traj_;
  PdGains gains_;
  RepeatOptions opts_;
  double t0_;
};

/// Closed loop reference -> pd_control -> vehicle for the trajectory's
/// duration (times `laps` when looping). Throws TrackingDiverged.
RepeatReport repeat(SimVehicle& vehicle, const ReferenceTrajectory& traj, const PdGains& gains,
                    const RepeatOptions& opts = {});

/// Distance from (x, y) to the reference path, the polyline through the
/// sample positions.
double cross_track_error(const ReferenceTrajectory& traj, double x, double y);

}  // namespace gncbench::gnc
