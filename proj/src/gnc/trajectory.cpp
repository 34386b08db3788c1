#include "gncbench/gnc/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace gncbench::gnc {

namespace {

const std::vector<std::string> kColumns = {"t", "x", "y", "psi", "vx", "vy", "vpsi"};

bool finite(const TrajectorySample& s) {
  return std::isfinite(s.t) && s.pose.vec().allFinite() && s.vel.vec().allFinite();
}

}  // namespace

double ReferenceTrajectory::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    len += std::hypot(samples[i].pose.x - samples[i - 1].pose.x,
                      samples[i].pose.y - samples[i - 1].pose.y);
  return len;
}

void ReferenceTrajectory::validate(double max_gap) const {
  if (samples.empty()) throw InvalidTrajectory("trajectory is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!finite(samples[i]))
      throw InvalidTrajectory("trajectory sample " + std::to_string(i) + " is not finite");
    if (i == 0) continue;
    if (!(samples[i].t > samples[i - 1].t))
      throw InvalidTrajectory("trajectory timestamps not increasing at sample " +
                              std::to_string(i));
    const double gap = std::hypot(samples[i].pose.x - samples[i - 1].pose.x,
                                  samples[i].pose.y - samples[i - 1].pose.y);
    if (gap > max_gap)
      throw InvalidTrajectory("trajectory jumps " + format_number(gap) + " m at sample " +
                              std::to_string(i));
  }
}

TrajectorySample ReferenceTrajectory::at(double t) const {
  if (samples.empty()) throw InvalidTrajectory("trajectory is empty");
  if (t <= samples.front().t) return samples.front();
  if (t >= samples.back().t) return samples.back();
  auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const TrajectorySample& s) { return v < s.t; });
  const TrajectorySample& b = *hi;
  const TrajectorySample& a = *(hi - 1);
  const double w = (t - a.t) / (b.t - a.t);
  TrajectorySample out;
  out.t = t;
  out.pose.x = a.pose.x + w * (b.pose.x - a.pose.x);
  out.pose.y = a.pose.y + w * (b.pose.y - a.pose.y);
  out.pose.psi = wrap_angle(a.pose.psi + w * angle_diff(b.pose.psi, a.pose.psi));
  out.vel = BodyVelocity::from_vec(a.vel.vec() + w * (b.vel.vec() - a.vel.vec()));
  return out;
}

Table trajectory_to_table(const ReferenceTrajectory& traj) {
  Table table;
  table.columns = kColumns;
  table.rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    table.rows.push_back({s.t, s.pose.x, s.pose.y, s.pose.psi, s.vel.vx, s.vel.vy, s.vel.vpsi});
  return table;
}

ReferenceTrajectory trajectory_from_table(const Table& table) {
  std::vector<int> idx;
  for (const auto& name : kColumns) {
    const int c = table.column(name);
    if (c < 0) throw FormatError("trajectory file lacks column '" + name + "'");
    idx.push_back(c);
  }
  ReferenceTrajectory traj;
  traj.samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    TrajectorySample s;
    s.t = row[idx[0]];
    s.pose = {row[idx[1]], row[idx[2]], wrap_angle(row[idx[3]])};
    s.vel = {row[idx[4]], row[idx[5]], row[idx[6]]};
    traj.samples.push_back(s);
  }
  traj.validate();
  return traj;
}

void save_trajectory(const std::filesystem::path& path, const ReferenceTrajectory& traj) {
  save_table(path, trajectory_to_table(traj));
}

ReferenceTrajectory load_trajectory(const std::filesystem::path& path) {
  return trajectory_from_table(load_table(path));
}

ReferenceTrajectory straight_line(const Pose& start, double speed, double duration, double dt) {
  if (!(dt > 0.0) || !(duration >= 0.0))
    throw std::invalid_argument("straight_line: need dt > 0 and duration >= 0");
  const auto n = static_cast<std::size_t>(std::lround(duration / dt));
  ReferenceTrajectory traj;
  traj.samples.reserve(n + 1);
  const double c = std::cos(start.psi), s = std::sin(start.psi);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    traj.samples.push_back(
        {t, {start.x + c * speed * t, start.y + s * speed * t, start.psi}, {speed, 0.0, 0.0}});
  }
  return traj;
}

ReferenceTrajectory hold_position(const Pose& pose, double duration, double dt) {
  return straight_line(pose, 0.0, duration, dt);
}

}  // namespace gncbench::gnc
