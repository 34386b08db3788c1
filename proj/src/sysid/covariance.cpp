#include "gncbench/sysid/covariance.hpp"

#include "gncbench/ekf/ekf.hpp"
#include "gncbench/sysid/fit.hpp"

#include <algorithm>

namespace gncbench::sysid {

namespace {

template <int N>
Eigen::Matrix<double, N, N> sample_covariance(const std::vector<Eigen::Matrix<double, N, 1>>& xs) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  Vec mean = Vec::Zero();
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Mat cov = Mat::Zero();
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= static_cast<double>(xs.size() - 1);
  return 0.5 * (cov + cov.transpose());
}

std::vector<double> centered_average(const std::vector<double>& x, int window) {
  const int half = std::max(window, 1) / 2;
  const auto n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  return out;
}

// (v, dv/dt) reconstructed from the IMU alone: smoothed accelerations, their
// trapezoidal integral for the linear velocities, the smoothed gyro for the
// yaw rate and its central difference for the yaw acceleration.
std::vector<Vec6> sensor_reference(const MissionLog& log, int window, double dt) {
  const std::size_t n = log.size();
  std::vector<double> ax(n), ay(n), gz(n);
  for (std::size_t k = 0; k < n; ++k) {
    ax[k] = log.records[k].sensor.ax;
    ay[k] = log.records[k].sensor.ay;
    gz[k] = log.records[k].sensor.gyro_z;
  }
  ax = centered_average(ax, window);
  ay = centered_average(ay, window);
  gz = centered_average(gz, window);
  std::vector<Vec6> out(n);
  double vx = 0.0;
  double vy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      vx += 0.5 * (ax[k] + ax[k - 1]) * dt;
      vy += 0.5 * (ay[k] + ay[k - 1]) * dt;
    }
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = std::min(n - 1, k + 1);
    const double apsi = (gz[hi] - gz[lo]) / (static_cast<double>(hi - lo) * dt);
    out[k] << vx, vy, gz[k], ax[k], ay[k], apsi;
  }
  return out;
}

}  // namespace

CovarianceEstimate estimate_covariances(const MissionLog& log, const ParamVector& p,
                                        const KnownInertia& known, const CovarianceOptions& options) {
  if (log.size() < 100)
    throw InsufficientSamples("covariance estimation needs at least 100 records, log has " +
                              std::to_string(log.size()));
  log.validate();
  const double dt = log.sample_period();
  const DynamicParams params = p.unpack(known);
  CovarianceEstimate est;
  est.samples = log.size();

  std::vector<Vec3> model_meas;
  std::vector<Vec6> reference;
  if (log.has_truth()) {
    for (const auto& r : log.records) {
      const auto& s = *r.truth;
      model_meas.emplace_back(s.accel.ax, s.accel.ay, s.state.vel.vpsi);
      Vec6 mu;
      mu << s.state.vel.vec(), s.accel.vec();
      reference.push_back(mu);
    }
  } else {
    model_meas = predict_measurements(p, known, log);
    reference = sensor_reference(log, options.smoothing_window, dt);
    est.model_surrogate = true;
  }

  std::vector<Vec3> meas_err;
  meas_err.reserve(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) meas_err.push_back(log.records[k].sensor.vec() - model_meas[k]);

  std::vector<Vec6> pred_err;
  pred_err.reserve(log.size() - 1);
  for (std::size_t k = 1; k < log.size(); ++k)
    pred_err.push_back(reference[k] - ekf::transition(params, reference[k - 1], log.records[k].u, dt));

  est.noise.q_meas = sample_covariance<3>(meas_err);
  est.noise.r_model = sample_covariance<6>(pred_err) / dt;
  return est;
}

}  // namespace gncbench::sysid
