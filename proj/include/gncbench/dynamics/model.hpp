#pragma once

#include "gncbench/dynamics/types.hpp"

namespace gncbench {

/// Body-to-world rotation J(psi) for the planar pose.
Mat3 rotation(double psi);

/// M = diag(m, m, I).
Mat3 mass_matrix(const DynamicParams& params);

/// Coriolis/centripetal matrix C(v). Skew-symmetric, so v' C(v) v = 0.
Mat3 coriolis(const DynamicParams& params, const BodyVelocity& nu);

/// Damping matrix D(v) = diag(-dl_i - dc_i |v_i|).
Mat3 damping(const DynamicParams& params, const BodyVelocity& nu);

/// Restoring term g(eta). Identically zero for a planar ground vehicle.
inline Vec3 restoring(const Pose&) { return Vec3::Zero(); }

/// Velocity-dependent state matrix Phi(v) such that dv/dt = Phi(v) v + M^-1 T u.
Mat3 state_matrix(const DynamicParams& params, const BodyVelocity& nu);

/// dv/dt = Phi(v) v + M^-1 T u.
BodyAccel body_accel(const DynamicParams& params, const BodyVelocity& nu,
                     const ControlAction& u);

/// dv/dt from the force balance M dv/dt + C(v) v + D(v) v + g = T u.
/// Independent of state_matrix(); the two must agree.
BodyAccel body_accel_from_forces(const DynamicParams& params, const VehicleState& state,
                                 const ControlAction& u);

struct StateDerivative {
  Vec3 pose_rate;
  BodyAccel accel;
};

/// Continuous-time dynamics. Throws NonFiniteState on non-finite input.
StateDerivative derivative(const DynamicParams& params, const VehicleState& state,
                           const ControlAction& u);

/// One fixed-step RK4 step. `accel_perturbation` is added to dv/dt and held
/// constant over the step (process noise). Requires 0 < dt <= 0.1.
VehicleState step(const DynamicParams& params, const VehicleState& state,
                  const ControlAction& u, double dt,
                  const Vec3& accel_perturbation = Vec3::Zero());

/// Velocity part of step(): the twist dynamics do not depend on the pose, so
/// this yields bit-identical velocities at a fraction of the cost.
BodyVelocity step_velocity(const DynamicParams& params, const BodyVelocity& vel,
                           const ControlAction& u, double dt);

}  // namespace gncbench
