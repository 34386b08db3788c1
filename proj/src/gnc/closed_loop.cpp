#include "gncbench/gnc/closed_loop.hpp"

#include "gncbench/dynamics/model.hpp"
#include "gncbench/sim/mission.hpp"
#include "gncbench/sim/sensor.hpp"

namespace gncbench::gnc {

SimVehicle::SimVehicle(const VehicleSetup& setup)
    : setup_(setup),
      sensor_rng_(setup.seed),
      process_rng_(setup.seed ^ 0x9e3779b97f4a7c15ULL),
      sensor_noise_(setup.plant_noise.q_meas),
      process_noise_(accel_block(setup.plant_noise.r_model)),
      state_(setup.initial),
      filter_(ekf::EkfState::at_rest()),
      est_pose_(setup.initial.pose) {
  setup_.plant.validate();
  setup_.model.validate();
  setup_.plant_noise.validate();
  setup_.filter_noise.validate();
  if (!(setup_.dt > 0.0 && setup_.dt <= 0.1))
    throw std::invalid_argument("SimVehicle: dt must be in (0, 0.1]");
  filter_.mu.head<3>() = setup_.initial.vel.vec();
}

Pose SimVehicle::nav_pose() const { return setup_.perfect_state ? state_.pose : est_pose_; }

BodyVelocity SimVehicle::nav_velocity() const {
  return setup_.perfect_state ? state_.vel : filter_.velocity();
}

LogRecord SimVehicle::tick(const ControlAction& u) {
  const double t = time();
  const Vec3 w = process_noise_.draw(process_rng_);
  const BodyAccel accel =
      BodyAccel::from_vec(derivative(setup_.plant, state_, u).accel.vec() + w);
  const Vec3 z = ideal_measurement(accel, state_.vel) + sensor_noise_.draw(sensor_rng_);
  LogRecord rec{t, u, {t, z.x(), z.y(), z.z()}, TruthSample{state_, accel}};

  if (!setup_.perfect_state) {
    if (tick_ > 0)
      filter_ = ekf::predict(filter_, u, setup_.model, setup_.filter_noise, setup_.dt);
    ekf::UpdateDiagnostics diag;
    filter_ = ekf::update(filter_, rec.sensor, setup_.filter_noise, &diag);
    innovation_ = diag.innovation;
  }
  state_ = step(setup_.plant, state_, u, setup_.dt, w);
  if (setup_.perfect_state) {
    est_pose_ = state_.pose;
  } else {
    est_pose_ = ekf::dead_reckon(est_pose_, filter_.mu, setup_.dt);
  }
  ++tick_;
  return rec;
}

}  // namespace gncbench::gnc
