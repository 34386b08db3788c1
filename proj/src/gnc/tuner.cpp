#include "gncbench/gnc/tuner.hpp"

#include "gncbench/dynamics/model.hpp"
#include "gncbench/sysid/huber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gncbench::gnc {

ClosedLoopResult simulate_tracking(const DynamicParams& params, const ReferenceTrajectory& traj,
                                   const PdGains& gains, const TuneOptions& opts) {
  traj.validate();
  const auto n = static_cast<std::size_t>(std::lround(traj.duration() / opts.dt)) + 1;
  VehicleState state{traj.samples.front().pose, traj.samples.front().vel};
  ClosedLoopResult out;
  double sumsq = 0.0;
  std::size_t k = 0;
  try {
    for (; k < n; ++k) {
      const TrajectorySample ref = traj.at(traj.start_time() + static_cast<double>(k) * opts.dt);
      const Vec3 err(ref.pose.x - state.pose.x, ref.pose.y - state.pose.y,
                     angle_diff(ref.pose.psi, state.pose.psi));
      const double e = err.norm();
      if (!(e <= opts.divergence_bound)) {
        out.bounded = false;
        break;
      }
      out.cost += sysid::huber(e, opts.huber_delta);
      sumsq += err.head<2>().squaredNorm();
      out.max_position_error = std::max(out.max_position_error, err.head<2>().norm());
      const ControlAction u = pd_control(gains, ref.pose, state.pose, state.vel.vpsi, ref.vel.vpsi);
      state = step(params, state, u, opts.dt);
    }
  } catch (const NonFiniteState&) {
    out.bounded = false;
  }
  if (!out.bounded) {
    out.cost = std::numeric_limits<double>::infinity();
    out.rms_position_error = std::numeric_limits<double>::infinity();
    return out;
  }
  out.rms_position_error = std::sqrt(sumsq / static_cast<double>(n));
  return out;
}

Vec3 terminal_speeds(const DynamicParams& params) {
  params.validate();
  Vec3 out;
  for (int axis = 0; axis < 3; ++axis) {
    double best = 0.0;
    for (double sign : {1.0, -1.0}) {
      Vec3 cmd = Vec3::Zero();
      cmd(axis) = sign;
      const ControlAction u = ControlAction::from_vec(cmd);
      BodyVelocity v;
      double speed = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 200000; ++k) {
        const BodyVelocity next = step_velocity(params, v, u, 0.01);
        const double change = (next.vec() - v.vec()).norm();
        v = next;
        if (!v.vec().allFinite() || v.vec().norm() > 1e6) break;
        if (change < 1e-12 * (1.0 + v.vec().norm())) {
          speed = std::abs(v.vec()(axis));
          break;
        }
      }
      best = std::max(best, speed);
    }
    out(axis) = best;
  }
  return out;
}

TuneResult tune_gains(const DynamicParams& params, const ReferenceTrajectory& traj,
                      const GainSearchSpace& space, const TuneOptions& opts) {
  traj.validate();
  if (space.grid_points < 2 || space.refinements < 1)
    throw std::invalid_argument("tune_gains: need at least 2 grid points and 1 refinement");
  if ((space.upper.array() < space.lower.array()).any())
    throw std::invalid_argument("tune_gains: search box upper bound below lower bound");

  TuneResult result;
  const Vec3 limits = terminal_speeds(params) * opts.speed_margin;
  double max_surge = 0.0, max_yaw = 0.0, lateral = 0.0;
  for (const auto& s : traj.samples) {
    max_surge = std::max(max_surge, std::abs(s.vel.vx));
    max_yaw = std::max(max_yaw, std::abs(s.vel.vpsi));
    lateral += s.vel.vy * s.vel.vy;
  }
  result.lateral_demand_rms = std::sqrt(lateral / static_cast<double>(traj.samples.size()));
  if (max_surge > limits.x())
    throw InfeasibleTrajectory("reference surge speed " + format_number(max_surge) +
                               " m/s exceeds the saturated terminal speed " +
                               format_number(limits.x()) + " m/s");
  if (max_yaw > limits.z())
    throw InfeasibleTrajectory("reference yaw rate " + format_number(max_yaw) +
                               " rad/s exceeds the saturated terminal rate " +
                               format_number(limits.z()) + " rad/s");

  auto evaluate = [&](const PdGains& g) {
    const ClosedLoopResult r = simulate_tracking(params, traj, g, opts);
    ++result.evaluations;
    result.candidates.emplace_back(g, r.cost);
    if (result.evaluations == 1 || r.cost < result.best.cost) {
      result.best = r;
      result.gains = g;
    }
  };

  Vec3 span = space.upper - space.lower;
  evaluate(PdGains::from_vec(0.5 * (space.lower + space.upper)));
  for (int round = 0; round < space.refinements; ++round) {
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3 center = result.gains.vec();
      const double lo = std::max(space.lower(axis), center(axis) - 0.5 * span(axis));
      const double hi = std::min(space.upper(axis), center(axis) + 0.5 * span(axis));
      for (int i = 0; i < space.grid_points; ++i) {
        Vec3 cand = center;
        cand(axis) = lo + (hi - lo) * i / (space.grid_points - 1);
        if (cand == center) continue;
        evaluate(PdGains::from_vec(cand));
      }
    }
    span *= 2.0 / (space.grid_points - 1);
  }
  if (!result.best.bounded)
    throw InfeasibleTrajectory("no gains in the search box keep the tracking error bounded");
  return result;
}

bool stabilizes(const DynamicParams& params, const PdGains& gains, double duration, double dt) {
  const Pose offsets[] = {{-0.3, 0.0, 0.0}, {0.0, 0.0, 0.3}};
  const auto n = static_cast<std::size_t>(std::lround(duration / dt));
  for (const Pose& start : offsets) {
    VehicleState s{start, {}};
    const double initial = start.vec().norm();
    try {
      for (std::size_t k = 0; k < n; ++k)
        s = step(params, s, pd_control(gains, Pose{}, s.pose, s.vel.vpsi, 0.0), dt);
    } catch (const NonFiniteState&) {
      return false;
    }
    if (!(s.pose.vec().norm() < 0.1 * initial)) return false;
  }
  return true;
}

}  // namespace gncbench::gnc
