#pragma once

#include "gncbench/dynamics/types.hpp"
#include "gncbench/ekf/ekf.hpp"
#include "gncbench/sim/mission_log.hpp"
#include "gncbench/sim/noise.hpp"
#include "gncbench/sysid/param_vector.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace gncbench::test {

/// The simulated vehicle used throughout the suite.
inline DynamicParams vehicle() {
  DynamicParams p;
  p.mass = 1.47;
  p.inertia = 810.44;
  p.dl = Vec3(-7.0, -7.0, -500.553);
  p.dc = Vec3(-3.5, -3.5, -250.0);
  p.torque_map = Vec3(1.0, 1.0, 29.99).asDiagonal();
  return p;
}

/// Filter noise model used by the estimation tests.
inline NoiseModel filter_noise() {
  NoiseModel n;
  n.q_meas = Vec3(1e-4, 1e-4, 1e-6).asDiagonal();
  Vec6 r;
  r << 1e-6, 1e-6, 1e-8, 1e-2, 1e-2, 1e-4;
  n.r_model = r.asDiagonal();
  return n;
}

inline bool is_psd(const Mat6& s) {
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::SelfAdjointEigenSolver<Mat6> eig(s);
  return eig.eigenvalues().minCoeff() >= -1e-9;
}

/// Truth with every entry scaled by 1 -/+ fraction, alternating.
inline sysid::ParamVector perturbed_truth(double fraction) {
  sysid::ParamArray v = sysid::ParamVector::pack(vehicle()).values();
  for (int i = 0; i < sysid::kParamCount; ++i) v(i) *= (i % 2 ? 1.0 + fraction : 1.0 - fraction);
  return sysid::ParamVector(v);
}

/// RMS of the noise-free measurement (ax, ay, gyro) along a log with truth.
inline Vec3 signal_rms(const MissionLog& log) {
  Vec3 ss = Vec3::Zero();
  for (const auto& r : log.records)
    ss += Vec3(r.truth->accel.ax, r.truth->accel.ay, r.truth->state.vel.vpsi).cwiseAbs2();
  return (ss / static_cast<double>(log.size())).cwiseSqrt();
}

/// Sensor noise with per-channel std equal to `fraction` of the signal RMS.
inline NoiseModel relative_noise(const MissionLog& clean, double fraction) {
  NoiseModel n;
  n.q_meas = (fraction * signal_rms(clean)).cwiseAbs2().asDiagonal();
  return n;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec3(Rng& rng, double scale) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gncbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Sinuous circle: constant surge command, yaw command oscillating about a
/// positive bias. Seven oscillation periods make one lap of the reference
/// vehicle; in steady state the lap is periodic and closes to ~3 mm.
inline constexpr double kSinuousPeriod = 19.175;
inline constexpr double kSinuousLap = 7.0 * kSinuousPeriod;
inline ControlAction sinuous_circle_command(double t) {
  return {0.7, 0.0, 0.8 + 0.2 * std::sin(2.0 * 3.141592653589793 * t / kSinuousPeriod)};
}

/// Monte-Carlo NEES of the filter against its own discrete process model:
/// x_k = g(u_k, x_{k-1}) + w_k with w ~ N(0, R dt), z_k = h(x_k) + v_k with
/// v ~ N(0, Q), x_0 ~ N(0, Sigma_0). Returns the run-averaged NEES per step.
inline std::vector<double> average_nees(const DynamicParams& params, const NoiseModel& noise,
                                        const std::vector<ControlAction>& controls, double dt,
                                        int runs, std::uint64_t seed, double initial_variance) {
  std::vector<double> nees(controls.size(), 0.0);
  const GaussianSampler<6> process(noise.r_model * dt);
  const GaussianSampler<3> sensor(noise.q_meas);
  for (int run = 0; run < runs; ++run) {
    Rng rng(seed + static_cast<std::uint64_t>(run));
    ekf::EkfState belief = ekf::EkfState::at_rest(initial_variance);
    Vec6 x = GaussianSampler<6>(belief.sigma).draw(rng);
    for (std::size_t k = 0; k < controls.size(); ++k) {
      if (k > 0) {
        x = ekf::transition(params, x, controls[k], dt) + process.draw(rng);
        belief = ekf::predict(belief, controls[k], params, noise, dt);
      }
      const Vec3 z = ekf::measurement_model(x) + sensor.draw(rng);
      belief = ekf::update(belief, {static_cast<double>(k) * dt, z.x(), z.y(), z.z()}, noise);
      const Vec6 e = x - belief.mu;
      nees[k] += e.dot(belief.sigma.ldlt().solve(e)) / runs;
    }
  }
  return nees;
}

/// Velocity from the raw IMU alone: accelerometers integrated from rest,
/// yaw rate taken from the gyro.
inline std::vector<Vec3> naive_velocity(const MissionLog& log) {
  std::vector<Vec3> out;
  Vec3 v = Vec3::Zero();
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& s = log.records[k].sensor;
    if (k > 0) {
      const double dt = log.records[k].t - log.records[k - 1].t;
      const auto& prev = log.records[k - 1].sensor;
      v.x() += 0.5 * (s.ax + prev.ax) * dt;
      v.y() += 0.5 * (s.ay + prev.ay) * dt;
    }
    v.z() = s.gyro_z;
    out.push_back(v);
  }
  return out;
}

}  // namespace gncbench::test
