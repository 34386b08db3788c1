#include "gncbench/sim/sensor.hpp"

#include "gncbench/dynamics/model.hpp"

namespace gncbench {

SensorSample sense(const DynamicParams& params, const VehicleState& state,
                   const ControlAction& u, const NoiseModel& noise, std::uint64_t seed,
                   double t) {
  const BodyAccel accel = derivative(params, state, u).accel;
  Rng rng(seed);
  const Vec3 z = ideal_measurement(accel, state.vel) + GaussianSampler<3>(noise.q_meas).draw(rng);
  return {t, z.x(), z.y(), z.z()};
}

}  // namespace gncbench
