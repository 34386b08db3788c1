#include "gncbench/dynamics/model.hpp"

#include <cmath>

namespace gncbench {

Mat3 rotation(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Mat3 j;
  j << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return j;
}

Mat3 mass_matrix(const DynamicParams& params) {
  return Vec3(params.mass, params.mass, params.inertia).asDiagonal();
}

Mat3 coriolis(const DynamicParams& params, const BodyVelocity& nu) {
  const double m = params.mass;
  Mat3 c;
  c << 0.0, 0.0, -m * nu.vy,
       0.0, 0.0, m * nu.vx,
       m * nu.vy, -m * nu.vx, 0.0;
  return c;
}

Mat3 damping(const DynamicParams& params, const BodyVelocity& nu) {
  const Vec3 speed = nu.vec().cwiseAbs();
  return (-params.dl - params.dc.cwiseProduct(speed)).asDiagonal();
}

Mat3 state_matrix(const DynamicParams& params, const BodyVelocity& nu) {
  const double m = params.mass;
  const double inertia = params.inertia;
  const Vec3 speed = nu.vec().cwiseAbs();
  Mat3 phi;
  phi << (params.dl.x() + params.dc.x() * speed.x()) / m, 0.0, nu.vy,
         0.0, (params.dl.y() + params.dc.y() * speed.y()) / m, -nu.vx,
         -m * nu.vy / inertia, m * nu.vx / inertia,
         (params.dl.z() + params.dc.z() * speed.z()) / inertia;
  return phi;
}

BodyAccel body_accel(const DynamicParams& params, const BodyVelocity& nu,
                     const ControlAction& u) {
  const Vec3 v = nu.vec();
  const Vec3 tau = params.torque_map * u.vec();
  const Vec3 inv_mass(1.0 / params.mass, 1.0 / params.mass, 1.0 / params.inertia);
  return BodyAccel::from_vec(state_matrix(params, nu) * v + inv_mass.cwiseProduct(tau));
}

BodyAccel body_accel_from_forces(const DynamicParams& params, const VehicleState& state,
                                 const ControlAction& u) {
  const Vec3 v = state.vel.vec();
  const Vec3 tau = params.torque_map * u.vec();
  const Vec3 rhs = tau - coriolis(params, state.vel) * v - damping(params, state.vel) * v -
                   restoring(state.pose);
  return BodyAccel::from_vec(mass_matrix(params).inverse() * rhs);
}

StateDerivative derivative(const DynamicParams& params, const VehicleState& state,
                           const ControlAction& u) {
  if (!is_finite(state)) throw NonFiniteState("derivative: non-finite state");
  return {rotation(state.pose.psi) * state.vel.vec(), body_accel(params, state.vel, u)};
}

namespace {

struct Rate {
  Vec3 pose;
  Vec3 vel;
};

Rate rate_at(const DynamicParams& params, const Vec3& pose, const Vec3& vel,
             const ControlAction& u, const Vec3& perturbation) {
  const BodyVelocity nu = BodyVelocity::from_vec(vel);
  return {rotation(pose.z()) * vel, body_accel(params, nu, u).vec() + perturbation};
}

}  // namespace

VehicleState step(const DynamicParams& params, const VehicleState& state,
                  const ControlAction& u, double dt, const Vec3& accel_perturbation) {
  if (!(dt > 0.0) || dt > 0.1) throw std::invalid_argument("step: dt must be in (0, 0.1]");
  if (!is_finite(state)) throw NonFiniteState("step: non-finite state");

  // Heading is integrated unwrapped inside the step and wrapped at the end.
  const Vec3 p0 = state.pose.vec();
  const Vec3 v0 = state.vel.vec();
  const Rate k1 = rate_at(params, p0, v0, u, accel_perturbation);
  const Rate k2 = rate_at(params, p0 + 0.5 * dt * k1.pose, v0 + 0.5 * dt * k1.vel, u,
                          accel_perturbation);
  const Rate k3 = rate_at(params, p0 + 0.5 * dt * k2.pose, v0 + 0.5 * dt * k2.vel, u,
                          accel_perturbation);
  const Rate k4 = rate_at(params, p0 + dt * k3.pose, v0 + dt * k3.vel, u, accel_perturbation);

  const Vec3 p1 = p0 + dt / 6.0 * (k1.pose + 2.0 * k2.pose + 2.0 * k3.pose + k4.pose);
  const Vec3 v1 = v0 + dt / 6.0 * (k1.vel + 2.0 * k2.vel + 2.0 * k3.vel + k4.vel);

  VehicleState next{Pose::from_vec(p1), BodyVelocity::from_vec(v1)};
  if (!is_finite(next)) throw NonFiniteState("step: integration diverged");
  return next;
}

BodyVelocity step_velocity(const DynamicParams& params, const BodyVelocity& vel,
                           const ControlAction& u, double dt) {
  const Vec3 zero = Vec3::Zero();
  const Vec3 v0 = vel.vec();
  auto accel = [&](const Vec3& v) {
    return Vec3(body_accel(params, BodyVelocity::from_vec(v), u).vec() + zero);
  };
  const Vec3 k1 = accel(v0);
  const Vec3 k2 = accel(v0 + 0.5 * dt * k1);
  const Vec3 k3 = accel(v0 + 0.5 * dt * k2);
  const Vec3 k4 = accel(v0 + dt * k3);
  return BodyVelocity::from_vec(v0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace gncbench
