#include "gncbench/ekf/ekf.hpp"

#include "gncbench/dynamics/model.hpp"

#include <cmath>

namespace gncbench::ekf {

EkfState EkfState::at_rest(double variance) {
  EkfState s;
  s.mu.setZero();
  s.sigma = Mat6::Identity() * variance;
  return s;
}

Vec6 transition(const DynamicParams& params, const Vec6& mu, const ControlAction& u, double dt) {
  const BodyVelocity nu = BodyVelocity::from_vec(mu.head<3>());
  Vec6 next;
  next.head<3>() = mu.head<3>() + mu.tail<3>() * dt;
  next.tail<3>() = body_accel(params, nu, u).vec();
  return next;
}

Mat3 accel_jacobian(const DynamicParams& params, const BodyVelocity& nu) {
  const double m = params.mass;
  const double inertia = params.inertia;
  // d(v|v|)/dv = 2|v|, continuous through zero.
  Mat3 a;
  a << (params.dl.x() + 2.0 * params.dc.x() * std::abs(nu.vx)) / m, nu.vpsi, nu.vy,
       -nu.vpsi, (params.dl.y() + 2.0 * params.dc.y() * std::abs(nu.vy)) / m, -nu.vx,
       0.0, 0.0, (params.dl.z() + 2.0 * params.dc.z() * std::abs(nu.vpsi)) / inertia;
  return a;
}

Mat6 transition_jacobian(const DynamicParams& params, const Vec6& mu, double dt) {
  Mat6 g = Mat6::Zero();
  g.topLeftCorner<3, 3>().setIdentity();
  g.topRightCorner<3, 3>() = Mat3::Identity() * dt;
  g.bottomLeftCorner<3, 3>() = accel_jacobian(params, BodyVelocity::from_vec(mu.head<3>()));
  return g;
}

Mat36 measurement_jacobian() {
  Mat36 h = Mat36::Zero();
  h(0, 3) = 1.0;
  h(1, 4) = 1.0;
  h(2, 2) = 1.0;
  return h;
}

EkfState predict(const EkfState& state, const ControlAction& u, const DynamicParams& params,
                 const NoiseModel& noise, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ekf::predict: dt must be positive");
  if (!state.mu.allFinite() || !state.sigma.allFinite())
    throw NonFiniteState("ekf::predict: non-finite belief");
  const Mat6 g = transition_jacobian(params, state.mu, dt);
  EkfState out;
  out.mu = transition(params, state.mu, u, dt);
  const Mat6 sigma = g * state.sigma * g.transpose() + noise.r_model * dt;
  out.sigma = 0.5 * (sigma + sigma.transpose());
  if (!out.mu.allFinite() || !out.sigma.allFinite())
    throw NonFiniteState("ekf::predict: prediction diverged");
  return out;
}

EkfState update(const EkfState& state, const SensorSample& z, const NoiseModel& noise,
                UpdateDiagnostics* diagnostics) {
  const Mat36 h = measurement_jacobian();
  const Mat3 s = h * state.sigma * h.transpose() + noise.q_meas;
  const Mat3 s_sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(s_sym, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw SingularInnovation("ekf::update: innovation covariance is singular");

  const Eigen::LLT<Mat3> llt(s_sym);
  // K = Sigma H' S^-1, computed as (S^-1 H Sigma)' since S and Sigma are symmetric.
  const Eigen::Matrix<double, 6, 3> k = llt.solve(h * state.sigma).transpose();
  const Vec3 innovation = z.vec() - measurement_model(state.mu);

  EkfState out;
  out.mu = state.mu + k * innovation;
  const Mat6 sigma = (Mat6::Identity() - k * h) * state.sigma;
  out.sigma = 0.5 * (sigma + sigma.transpose());
  if (diagnostics) {
    diagnostics->innovation = innovation;
    diagnostics->innovation_cov = s_sym;
  }
  return out;
}

Pose dead_reckon(const Pose& pose, const Vec6& mu, double dt) {
  const double psi_mid = pose.psi + 0.5 * mu(2) * dt;
  const Vec3 delta = rotation(psi_mid) * mu.head<3>() * dt;
  return Pose::from_vec(pose.vec() + delta);
}

std::vector<FilterStep> run_filter(const MissionLog& log, const DynamicParams& params,
                                   const NoiseModel& noise, const EkfState& init,
                                   const FilterOptions& options) {
  log.validate();
  std::vector<FilterStep> trace;
  trace.reserve(log.size());
  EkfState belief = init;
  Pose pose = options.initial_pose;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& rec = log.records[k];
    FilterStep step;
    step.t = rec.t;
    try {
      if (k > 0) {
        const double dt = rec.t - log.records[k - 1].t;
        pose = dead_reckon(pose, belief.mu, dt);
        belief = predict(belief, rec.u, params, noise, dt);
      }
      if (options.apply_updates) {
        UpdateDiagnostics diag;
        belief = update(belief, rec.sensor, noise, &diag);
        step.innovation = diag.innovation;
      }
    } catch (const SingularInnovation& e) {
      throw SingularInnovation(std::string(e.what()) + " at record " + std::to_string(k));
    } catch (const NonFiniteState& e) {
      throw NonFiniteState(std::string(e.what()) + " at record " + std::to_string(k),
                           static_cast<long>(k));
    }
    step.state = belief;
    step.pose = pose;
    trace.push_back(step);
  }
  return trace;
}

}  // namespace gncbench::ekf
