#include "gncbench/sim/mission.hpp"

#include "gncbench/dynamics/model.hpp"
#include "gncbench/sim/sensor.hpp"

namespace gncbench {

MissionLog run_mission(const DynamicParams& params, const NoiseModel& noise,
                       const std::vector<ControlAction>& controls, double dt, std::uint64_t seed,
                       const MissionOptions& options) {
  if (controls.empty()) throw std::invalid_argument("run_mission: empty control sequence");
  params.validate();
  noise.validate();

  // Separate streams so enabling process noise does not change sensor draws.
  Rng sensor_rng(seed);
  Rng process_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const GaussianSampler<3> sensor_noise(noise.q_meas);
  const GaussianSampler<3> process_noise(accel_block(noise.r_model));

  MissionLog log;
  log.records.reserve(controls.size());
  VehicleState state = options.initial;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const double t = options.t0 + static_cast<double>(k) * dt;
    const ControlAction& u = controls[k];
    const Vec3 w = process_noise.draw(process_rng);
    try {
      const BodyAccel accel =
          BodyAccel::from_vec(derivative(params, state, u).accel.vec() + w);
      const Vec3 z = ideal_measurement(accel, state.vel) + sensor_noise.draw(sensor_rng);
      log.records.push_back({t, u, {t, z.x(), z.y(), z.z()}, TruthSample{state, accel}});
      state = step(params, state, u, dt, w);
    } catch (const NonFiniteState& e) {
      throw NonFiniteState(std::string("run_mission: ") + e.what() + " at step " +
                               std::to_string(k),
                           static_cast<long>(k));
    }
  }
  return log;
}

}  // namespace gncbench
