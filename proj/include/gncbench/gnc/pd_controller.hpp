#pragma once

#include "gncbench/dynamics/types.hpp"

namespace gncbench::gnc {

struct PdGains {
  double alpha = 1.0;  // surge, on body-frame x error
  double beta = 1.0;   // heading, proportional
  double gamma = 0.0;  // heading, on yaw-rate error

  Vec3 vec() const { return {alpha, beta, gamma}; }
  static PdGains from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

  /// Throws std::invalid_argument on non-finite gains.
  void validate() const;
};

/// Pose error J(psi_est)' (ref - est) in the estimated body frame, heading
/// component wrapped to (-pi, pi].
Vec3 body_error(const Pose& ref, const Pose& est);

/// ux = alpha e_x, uy = 0, upsi = beta e_psi + gamma (ref_rate - est_rate),
/// saturated to [-1, 1].
ControlAction pd_control(const PdGains& gains, const Pose& ref, const Pose& est,
                         double est_rate_psi, double ref_rate_psi);

}  // namespace gncbench::gnc
