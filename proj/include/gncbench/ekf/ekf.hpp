#pragma once

#include "gncbench/dynamics/types.hpp"
#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"

#include <stdexcept>
#include <vector>

namespace gncbench::ekf {

using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Filter belief over mu = (vx, vy, vpsi, ax, ay, apsi).
struct EkfState {
  Vec6 mu = Vec6::Zero();
  Mat6 sigma = Mat6::Identity() * 1e-3;

  /// Zero mean with diagonal covariance `variance`.
  static EkfState at_rest(double variance = 1e-3);

  BodyVelocity velocity() const { return BodyVelocity::from_vec(mu.head<3>()); }
  BodyAccel accel() const { return BodyAccel::from_vec(mu.tail<3>()); }
};

class SingularInnovation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process model g(u, mu): velocity advanced by the current acceleration
/// estimate, acceleration from the dynamic model at the current velocity.
Vec6 transition(const DynamicParams& params, const Vec6& mu, const ControlAction& u, double dt);

/// d(Phi(v) v)/dv, the velocity sensitivity of the model acceleration.
Mat3 accel_jacobian(const DynamicParams& params, const BodyVelocity& nu);

/// Jacobian G of transition() with respect to mu:
///   [ I        dt*I ]
///   [ dA/dv    0    ]
Mat6 transition_jacobian(const DynamicParams& params, const Vec6& mu, double dt);

/// h(mu) = (ax, ay, vpsi).
inline Vec3 measurement_model(const Vec6& mu) { return {mu(3), mu(4), mu(2)}; }

/// H, the selector matrix of measurement_model().
Mat36 measurement_jacobian();

/// Prediction step. Adds noise.r_model * dt. Throws NonFiniteState.
EkfState predict(const EkfState& state, const ControlAction& u, const DynamicParams& params,
                 const NoiseModel& noise, double dt);

struct UpdateDiagnostics {
  Vec3 innovation = Vec3::Zero();
  Mat3 innovation_cov = Mat3::Zero();
};

/// Measurement step with the IMU sample. Covariance uses (I - KH) Sigma and is
/// symmetrized. Throws SingularInnovation when H Sigma H' + Q has condition
/// number above 1e12.
EkfState update(const EkfState& state, const SensorSample& z, const NoiseModel& noise,
                UpdateDiagnostics* diagnostics = nullptr);

/// Advances the pose by J(psi_mid) v dt with psi_mid = psi + vpsi dt / 2.
Pose dead_reckon(const Pose& pose, const Vec6& mu, double dt);

struct FilterOptions {
  Pose initial_pose;
  /// When false the filter runs open loop on the model (prediction only).
  bool apply_updates = true;
};

struct FilterStep {
  double t = 0.0;
  EkfState state;
  Pose pose;
  Vec3 innovation = Vec3::Zero();
};

/// Runs predict/update over every record. Record 0 is an update of `init`;
/// record k > 0 predicts with u_k over t_k - t_{k-1} and then updates with
/// the sample of record k. Errors are rethrown with the record index.
std::vector<FilterStep> run_filter(const MissionLog& log, const DynamicParams& params,
                                   const NoiseModel& noise, const EkfState& init,
                                   const FilterOptions& options = {});

}  // namespace gncbench::ekf
