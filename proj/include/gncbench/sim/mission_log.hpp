#pragma once

#include "gncbench/common/table.hpp"
#include "gncbench/dynamics/types.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace gncbench {

/// One IMU sample: body-frame accelerations and yaw rate.
struct SensorSample {
  double t = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double gyro_z = 0.0;

  Vec3 vec() const { return {ax, ay, gyro_z}; }
};

struct TruthSample {
  VehicleState state;
  BodyAccel accel;
};

struct LogRecord {
  double t = 0.0;
  ControlAction u;
  SensorSample sensor;
  std::optional<TruthSample> truth;
};

/// Timestamped controls and sensor samples, with ground truth when the
/// source is a simulation.
struct MissionLog {
  std::vector<LogRecord> records;

  bool has_truth() const { return !records.empty() && records.front().truth.has_value(); }
  std::size_t size() const { return records.size(); }
  /// Mean spacing of timestamps; 0 for fewer than two records.
  double sample_period() const;

  /// Throws FormatError unless timestamps strictly increase with a period
  /// uniform within 1% and truth is present on all records or none.
  void validate() const;
};

/// Columns: t ux uy upsi ax ay gyro [x y psi vx vy vpsi axt ayt apsit].
Table log_to_table(const MissionLog& log);
MissionLog log_from_table(const Table& table);

void save_log(const std::filesystem::path& path, const MissionLog& log);
MissionLog load_log(const std::filesystem::path& path);

}  // namespace gncbench
