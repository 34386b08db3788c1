#include "gncbench/gnc/pd_controller.hpp"

#include "gncbench/dynamics/model.hpp"

#include <cmath>

namespace gncbench::gnc {

void PdGains::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
    throw std::invalid_argument("PD gains must be finite");
}

Vec3 body_error(const Pose& ref, const Pose& est) {
  const Vec3 world(ref.x - est.x, ref.y - est.y, angle_diff(ref.psi, est.psi));
  Vec3 e = rotation(est.psi).transpose() * world;
  e.z() = world.z();
  return e;
}

ControlAction pd_control(const PdGains& gains, const Pose& ref, const Pose& est,
                         double est_rate_psi, double ref_rate_psi) {
  gains.validate();
  const Vec3 e = body_error(ref, est);
  const double ux = gains.alpha * e.x();
  const double upsi = gains.beta * e.z() + gains.gamma * (ref_rate_psi - est_rate_psi);
  return {ux, 0.0, upsi};
}

}  // namespace gncbench::gnc
