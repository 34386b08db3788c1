#include "gncbench/gnc/teach_repeat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gncbench::gnc {

TeachResult teach(SimVehicle& vehicle, const std::vector<ControlSample>& stream,
                  TeachSource source) {
  if (stream.empty()) throw std::invalid_argument("teach: empty control stream");
  TeachResult out;
  out.trajectory.samples.reserve(stream.size());
  out.log.records.reserve(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const ControlSample& c = stream[k];
    if (k > 0 && !(c.t > stream[k - 1].t))
      throw std::invalid_argument("teach: control timestamps not increasing at " +
                                  std::to_string(k));
    TrajectorySample s;
    s.t = c.t;
    if (source == TeachSource::truth) {
      s.pose = vehicle.truth().pose;
      s.vel = vehicle.truth().vel;
    } else {
      s.pose = vehicle.estimated_pose();
      s.vel = vehicle.filter().velocity();
    }
    out.trajectory.samples.push_back(s);
    LogRecord rec = vehicle.tick(c.u);
    rec.t = c.t;
    rec.sensor.t = c.t;
    out.log.records.push_back(rec);
  }
  return out;
}

TrajectorySample reference_at(const ReferenceTrajectory& traj, double elapsed,
                              const RepeatOptions& opts) {
  const double period = traj.duration();
  if (!opts.loop || period <= 0.0) return traj.at(traj.start_time() + elapsed);

  const double lap = std::floor(elapsed / period);
  const double local = elapsed - lap * period;
  TrajectorySample s = traj.at(traj.start_time() + local);
  if (lap < 1.0 || local >= opts.blend_s || opts.blend_s <= 0.0) return s;

  // Fade out the closure gap between the lap end and the path start.
  const TrajectorySample& end = traj.samples.back();
  const TrajectorySample& start = traj.samples.front();
  const double w = 1.0 - local / opts.blend_s;
  TrajectorySample out = s;
  out.pose.x += w * (end.pose.x - start.pose.x);
  out.pose.y += w * (end.pose.y - start.pose.y);
  out.pose.psi = wrap_angle(s.pose.psi + w * angle_diff(end.pose.psi, start.pose.psi));
  out.vel = BodyVelocity::from_vec(s.vel.vec() + w * (end.vel.vec() - start.vel.vec()));
  return out;
}

double cross_track_error(const ReferenceTrajectory& traj, double x, double y) {
  const auto& s = traj.samples;
  if (s.empty()) throw InvalidTrajectory("trajectory is empty");
  double best = std::hypot(x - s[0].pose.x, y - s[0].pose.y);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double ax = s[i - 1].pose.x, ay = s[i - 1].pose.y;
    const double dx = s[i].pose.x - ax, dy = s[i].pose.y - ay;
    const double len2 = dx * dx + dy * dy;
    double w = len2 > 0.0 ? ((x - ax) * dx + (y - ay) * dy) / len2 : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    best = std::min(best, std::hypot(x - ax - w * dx, y - ay - w * dy));
  }
  return best;
}

Repeater::Repeater(ReferenceTrajectory traj, const PdGains& gains, const RepeatOptions& opts,
                   double t0)
    : traj_(std::move(traj)), gains_(gains), opts_(opts), t0_(t0) {
  traj_.validate();
  gains_.validate();
}

bool Repeater::finished(double t) const {
  if (opts_.loop && opts_.laps <= 0) return false;
  const int laps = opts_.loop ? opts_.laps : 1;
  return t - t0_ > traj_.duration() * laps + 1e-9;
}

RepeatStep Repeater::command(const SimVehicle& vehicle) const {
  const TrajectorySample ref = reference_at(traj_, vehicle.time() - t0_, opts_);
  const Pose pose = vehicle.nav_pose();
  const BodyVelocity vel = vehicle.nav_velocity();
  const double ct = cross_track_error(traj_, pose.x, pose.y);
  if (!(ct <= opts_.abort_cross_track))
    throw TrackingDiverged("cross-track error " + format_number(ct) +
                               " m exceeds the abort bound " +
                               format_number(opts_.abort_cross_track) + " m",
                           vehicle.time());
  const ControlAction u = pd_control(gains_, ref.pose, pose, vel.vpsi, ref.vel.vpsi);
  return {vehicle.time(), ref, u, pose, vel, vehicle.truth(), ct};
}

RepeatReport repeat(SimVehicle& vehicle, const ReferenceTrajectory& traj, const PdGains& gains,
                    const RepeatOptions& opts) {
  RepeatOptions bounded = opts;
  if (bounded.loop) bounded.laps = std::max(1, bounded.laps);
  const Repeater repeater(traj, gains, bounded, vehicle.time());

  RepeatReport rep;
  double vel_sq = 0.0, ct_sq = 0.0, track_sq = 0.0;
  while (!repeater.finished(vehicle.time())) {
    const RepeatStep st = repeater.command(vehicle);
    vel_sq += (st.nav_vel.vec() - st.truth.vel.vec()).squaredNorm();
    track_sq += (st.ref.vel.vec() - st.truth.vel.vec()).squaredNorm();
    ct_sq += st.cross_track * st.cross_track;
    const double drift = std::hypot(vehicle.estimated_pose().x - st.truth.pose.x,
                                    vehicle.estimated_pose().y - st.truth.pose.y);
    rep.max_drift = std::max(rep.max_drift, drift);
    rep.final_drift = drift;
    rep.steps.push_back(st);
    rep.log.records.push_back(vehicle.tick(st.u));
  }
  const auto n = static_cast<double>(std::max<std::size_t>(1, rep.steps.size()));
  rep.velocity_rmse = std::sqrt(vel_sq / n);
  rep.tracking_rmse = std::sqrt(track_sq / n);
  rep.cross_track_rms = std::sqrt(ct_sq / n);
  return rep;
}

}  // namespace gncbench::gnc
