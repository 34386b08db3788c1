#pragma once

#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"
#include "gncbench/sysid/param_vector.hpp"

namespace gncbench::sysid {

struct CovarianceOptions {
  /// Centered moving-average window (odd, samples) for the sensor-derived
  /// reference state used when the log has no ground truth.
  int smoothing_window = 5;
};

struct CovarianceEstimate {
  NoiseModel noise;
  /// True when R came from the sensor-derived reference instead of ground truth.
  bool model_surrogate = false;
  std::size_t samples = 0;
};

/// Q: sample covariance of (sensor - noise-free model measurement). With ground
/// truth the model measurement is the true (ax, ay, vpsi); otherwise it is the
/// forward simulation of `p`.
///
/// R: sample covariance of the one-step prediction error of the filter's
/// process model, mu_k - g(u_k, mu_{k-1}), divided by the sample period so it
/// is a continuous-time intensity. The reference mu is the true (v, dv/dt)
/// when available, else a zero-phase smoothed state derived from the sensors.
///
/// Both outputs are symmetrized. Throws InsufficientSamples below 100 records.
CovarianceEstimate estimate_covariances(const MissionLog& log, const ParamVector& p,
                                        const KnownInertia& known,
                                        const CovarianceOptions& options = {});

}  // namespace gncbench::sysid
