#include "gncbench/sim/mission_log.hpp"

#include <cmath>

namespace gncbench {

namespace {
const std::vector<std::string> kBaseColumns = {"t", "ux", "uy", "upsi", "ax", "ay", "gyro"};
const std::vector<std::string> kTruthColumns = {"x",  "y",  "psi", "vx",   "vy",
                                                "vpsi", "axt", "ayt", "apsit"};
}  // namespace

double MissionLog::sample_period() const {
  if (records.size() < 2) return 0.0;
  return (records.back().t - records.front().t) / static_cast<double>(records.size() - 1);
}

void MissionLog::validate() const {
  if (records.empty()) throw FormatError("mission log is empty");
  const bool truth = has_truth();
  const double period = sample_period();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.truth.has_value() != truth)
      throw FormatError("record " + std::to_string(i) + ": truth present on some records only");
    if (!std::isfinite(r.t) || !r.sensor.vec().allFinite())
      throw FormatError("record " + std::to_string(i) + ": non-finite values");
    if (i == 0) continue;
    const double gap = r.t - records[i - 1].t;
    if (!(gap > 0.0))
      throw FormatError("record " + std::to_string(i) + ": timestamps not strictly increasing");
    if (std::abs(gap - period) > 0.01 * period)
      throw FormatError("record " + std::to_string(i) + ": sample period not uniform");
  }
}

Table log_to_table(const MissionLog& log) {
  Table table;
  table.columns = kBaseColumns;
  const bool truth = log.has_truth();
  if (truth) table.columns.insert(table.columns.end(), kTruthColumns.begin(), kTruthColumns.end());
  table.rows.reserve(log.size());
  for (const auto& r : log.records) {
    std::vector<double> row = {r.t,         r.u.ux(),    r.u.uy(), r.u.upsi(),
                               r.sensor.ax, r.sensor.ay, r.sensor.gyro_z};
    if (truth) {
      const auto& s = *r.truth;
      row.insert(row.end(), {s.state.pose.x, s.state.pose.y, s.state.pose.psi, s.state.vel.vx,
                             s.state.vel.vy, s.state.vel.vpsi, s.accel.ax, s.accel.ay,
                             s.accel.apsi});
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

MissionLog log_from_table(const Table& table) {
  std::vector<std::string> truth_cols = kBaseColumns;
  truth_cols.insert(truth_cols.end(), kTruthColumns.begin(), kTruthColumns.end());
  bool truth = false;
  if (table.columns == truth_cols) {
    truth = true;
  } else if (table.columns != kBaseColumns) {
    throw FormatError("mission log header does not match the expected columns");
  }
  MissionLog log;
  log.records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    LogRecord r;
    r.t = row[0];
    r.u = ControlAction(row[1], row[2], row[3]);
    r.sensor = {row[0], row[4], row[5], row[6]};
    if (truth) {
      TruthSample s;
      s.state.pose = {row[7], row[8], row[9]};
      s.state.vel = {row[10], row[11], row[12]};
      s.accel = {row[13], row[14], row[15]};
      r.truth = s;
    }
    log.records.push_back(r);
  }
  log.validate();
  return log;
}

void save_log(const std::filesystem::path& path, const MissionLog& log) {
  save_table(path, log_to_table(log));
}

MissionLog load_log(const std::filesystem::path& path) { return log_from_table(load_table(path)); }

}  // namespace gncbench
