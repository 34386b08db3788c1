#pragma once

#include "gncbench/common/table.hpp"
#include "gncbench/dynamics/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace gncbench::gnc {

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  BodyVelocity vel;
};

class InvalidTrajectory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ReferenceTrajectory {
  std::vector<TrajectorySample> samples;

  bool empty() const { return samples.empty(); }
  double start_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }
  double duration() const { return empty() ? 0.0 : end_time() - start_time(); }
  /// Sum of planar distances between consecutive samples.
  double path_length() const;

  /// Throws InvalidTrajectory when empty, non-finite, not strictly increasing
  /// in time, or when consecutive positions are more than `max_gap` apart.
  void validate(double max_gap = 1.0) const;

  /// Linear interpolation in time, heading along the shortest arc. Clamped to
  /// the first/last sample outside the time span.
  TrajectorySample at(double t) const;
};

/// Columns t x y psi vx vy vpsi.
Table trajectory_to_table(const ReferenceTrajectory& traj);
ReferenceTrajectory trajectory_from_table(const Table& table);
void save_trajectory(const std::filesystem::path& path, const ReferenceTrajectory& traj);
ReferenceTrajectory load_trajectory(const std::filesystem::path& path);

/// Straight run along the heading of `start` at constant surge `speed`.
ReferenceTrajectory straight_line(const Pose& start, double speed, double duration, double dt);

/// Constant pose held for `duration`.
ReferenceTrajectory hold_position(const Pose& pose, double duration, double dt);

}  // namespace gncbench::gnc
