#include "gncbench/sysid/fit.hpp"

#include "gncbench/dynamics/model.hpp"
#include "gncbench/sysid/huber.hpp"
#include "gncbench/sysid/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace gncbench::sysid {

namespace {

using Predictions = Eigen::Matrix<double, Eigen::Dynamic, 3>;

constexpr double kRunawaySpeed = 1e6;
constexpr std::size_t kMinRecords = 100;
constexpr double kMinDuration = 10.0;

void require_samples(const MissionLog& log) {
  if (log.size() < kMinRecords)
    throw InsufficientSamples("identification needs at least " + std::to_string(kMinRecords) +
                              " records, log has " + std::to_string(log.size()));
}

Predictions simulate(const ParamArray& p, const KnownInertia& known, const MissionLog& log,
                     double dt) {
  const DynamicParams params = ParamVector(p).unpack(known);
  Predictions out(static_cast<Eigen::Index>(log.size()), 3);
  BodyVelocity vel;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const ControlAction& u = log.records[k].u;
    const BodyAccel a = body_accel(params, vel, u);
    const auto row = static_cast<Eigen::Index>(k);
    out(row, 0) = a.ax;
    out(row, 1) = a.ay;
    out(row, 2) = vel.vpsi;
    if (!out.row(row).allFinite())
      throw NonFiniteSimulation("simulation diverged at record " + std::to_string(k));
    vel = step_velocity(params, vel, u, dt);
    if (!(vel.vec().cwiseAbs().maxCoeff() < kRunawaySpeed))
      throw NonFiniteSimulation("simulation diverged at record " + std::to_string(k));
  }
  return out;
}

Predictions sensor_matrix(const MissionLog& log) {
  Predictions s(static_cast<Eigen::Index>(log.size()), 3);
  for (std::size_t k = 0; k < log.size(); ++k) s.row(static_cast<Eigen::Index>(k)) = log.records[k].sensor.vec();
  return s;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

Vec3 robust_scale(const Predictions& resid, const Vec3& floor) {
  Vec3 s;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> col(resid.col(c).data(), resid.col(c).data() + resid.rows());
    const double med = median(col);
    for (double& x : col) x = std::abs(x - med);
    s(c) = std::max(1.4826 * median(std::move(col)), floor(c));
  }
  return s;
}

template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = std::min<int>(n, hw > 1 ? static_cast<int>(hw) : 1);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

class Problem {
 public:
  Problem(const MissionLog& log, const KnownInertia& known, const FitOptions& opts)
      : log_(log), known_(known), opts_(opts), dt_(log.sample_period()), sensor_(sensor_matrix(log)) {
    for (int c = 0; c < 3; ++c) {
      const double rms = std::sqrt(sensor_.col(c).squaredNorm() / static_cast<double>(sensor_.rows()));
      floor_(c) = std::max(opts.scale_floor_fraction * rms, 1e-9);
    }
  }

  Predictions residual(const ParamArray& p) const { return sensor_ - simulate(p, known_, log_, dt_); }

  double cost(const Predictions& r, const Vec3& scale) const {
    double total = 0.0;
    for (int c = 0; c < 3; ++c)
      for (Eigen::Index k = 0; k < r.rows(); ++k) {
        const double z = r(k, c) / scale(c);
        total += opts_.robust ? huber(z, opts_.huber_delta) : 0.5 * z * z;
      }
    return total;
  }

  double weight(double z) const { return opts_.robust ? huber_weight(z, opts_.huber_delta) : 1.0; }

  /// d(prediction)/dp for the listed columns, central differences.
  std::vector<Predictions> sensitivities(const ParamArray& p, const std::vector<int>& cols) const {
    std::vector<Predictions> out(cols.size());
    std::vector<std::exception_ptr> errors(cols.size());
    parallel_for(static_cast<int>(cols.size()), [&](int j) {
      try {
        const int i = cols[static_cast<std::size_t>(j)];
        const double h = std::max(1e-6 * std::abs(p(i)), 1e-8);
        ParamArray hi = p;
        ParamArray lo = p;
        hi(i) += h;
        lo(i) -= h;
        out[static_cast<std::size_t>(j)] =
            (simulate(hi, known_, log_, dt_) - simulate(lo, known_, log_, dt_)) / (2.0 * h);
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    });
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    return out;
  }

  const Vec3& floor() const { return floor_; }

 private:
  const MissionLog& log_;
  KnownInertia known_;
  const FitOptions& opts_;
  double dt_;
  Predictions sensor_;
  Vec3 floor_;
};

std::vector<int> unexcited_parameters(const MissionLog& log) {
  Vec3 peak = Vec3::Zero();
  for (const auto& r : log.records) peak = peak.cwiseMax(r.u.vec().cwiseAbs());
  std::vector<int> out;
  for (int axis = 0; axis < 3; ++axis) {
    if (peak(axis) > 0.0) continue;
    out.push_back(kDl + axis);
    out.push_back(kDc + axis);
    for (int row = 0; row < 3; ++row) out.push_back(torque_index(row, axis));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ResidualDiagnostics diagnose(const Predictions& r, const Vec3& scale, const FitOptions& opts) {
  ResidualDiagnostics d;
  d.scale = scale;
  const auto n = static_cast<double>(r.rows());
  std::size_t down = 0;
  for (int c = 0; c < 3; ++c) {
    d.rms(c) = std::sqrt(r.col(c).squaredNorm() / n);
    d.max_abs(c) = r.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < r.rows(); ++k)
      if (std::abs(r(k, c) / scale(c)) > opts.huber_delta) ++down;
  }
  d.downweighted_fraction = opts.robust ? static_cast<double>(down) / (3.0 * n) : 0.0;
  return d;
}

}  // namespace

std::vector<Vec3> predict_measurements(const ParamVector& p, const KnownInertia& known,
                                       const MissionLog& log) {
  log.validate();
  const Predictions pred = simulate(p.values(), known, log, log.sample_period());
  std::vector<Vec3> out(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) out[k] = pred.row(static_cast<Eigen::Index>(k)).transpose();
  return out;
}

ParamVector default_initial_guess(const KnownInertia& known) {
  ParamArray v = ParamArray::Zero();
  v.segment<3>(kDl).setConstant(-1.0);
  v.segment<3>(kDc).setConstant(-1.0);
  v(torque_index(0, 0)) = 1.0;
  v(torque_index(1, 1)) = 1.0;
  v(torque_index(2, 2)) = known.inertia / known.mass;
  return ParamVector(v);
}

FitReport fit_dynamic(const MissionLog& log, const KnownInertia& known, const ParamVector& init,
                      const FitOptions& opts) {
  require_samples(log);
  log.validate();
  if (log.records.back().t - log.records.front().t < kMinDuration)
    throw InsufficientSamples("identification needs at least 10 s of data");
  if (!init.values().allFinite()) throw std::invalid_argument("fit_dynamic: non-finite initial guess");
  if (!(known.mass > 0.0) || !(known.inertia > 0.0))
    throw std::invalid_argument("fit_dynamic: mass and inertia must be positive");

  const Problem problem(log, known, opts);
  ParamArray p = init.values();

  Predictions resid;
  try {
    resid = problem.residual(p);
  } catch (const NonFiniteSimulation& e) {
    throw DivergedSimulation(std::string("initial guess is unstable: ") + e.what());
  }

  FitReport report;

  // Identifiability: unexcited axes, then numerically null sensitivity columns.
  std::vector<int> frozen = unexcited_parameters(log);
  {
    std::vector<int> all(kParamCount);
    for (int i = 0; i < kParamCount; ++i) all[static_cast<std::size_t>(i)] = i;
    const auto sens = problem.sensitivities(p, all);
    double largest = 0.0;
    std::vector<double> norms(kParamCount);
    for (int i = 0; i < kParamCount; ++i) {
      norms[static_cast<std::size_t>(i)] = sens[static_cast<std::size_t>(i)].norm();
      largest = std::max(largest, norms[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < kParamCount; ++i)
      if (norms[static_cast<std::size_t>(i)] <= opts.null_column_tolerance * largest &&
          std::find(frozen.begin(), frozen.end(), i) == frozen.end())
        frozen.push_back(i);
    std::sort(frozen.begin(), frozen.end());
  }
  report.unidentifiable = frozen;
  if (!frozen.empty() && !opts.freeze_unidentifiable) {
    std::string names;
    for (int i : frozen) names += (names.empty() ? "" : ", ") + ParamVector::name(i);
    throw SingularNormalEquations("unidentifiable parameters: " + names, frozen);
  }
  std::vector<int> active;
  for (int i = 0; i < kParamCount; ++i)
    if (std::find(frozen.begin(), frozen.end(), i) == frozen.end()) active.push_back(i);
  if (active.empty()) throw SingularNormalEquations("no identifiable parameters", frozen);
  const auto n_active = static_cast<Eigen::Index>(active.size());

  Vec3 scale = robust_scale(resid, problem.floor());
  const auto n_rows = resid.rows();

  auto expand = [&](const Eigen::VectorXd& x) {
    ParamArray full = p;
    for (Eigen::Index j = 0; j < n_active; ++j) full(active[static_cast<std::size_t>(j)]) = x(j);
    return full;
  };
  // Normalized residual, channel-major.
  auto normalized = [&](const Predictions& r) {
    Eigen::VectorXd z(3 * n_rows);
    for (int c = 0; c < 3; ++c) z.segment(c * n_rows, n_rows) = r.col(c) / scale(c);
    return z;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) {
    const auto sens = problem.sensitivities(expand(x), active);
    Eigen::MatrixXd j(3 * n_rows, n_active);
    for (Eigen::Index k = 0; k < n_active; ++k)
      for (int c = 0; c < 3; ++c)
        j.col(k).segment(c * n_rows, n_rows) = -sens[static_cast<std::size_t>(k)].col(c) / scale(c);
    return j;
  };

  Eigen::VectorXd x(n_active);
  for (Eigen::Index j = 0; j < n_active; ++j) x(j) = p(active[static_cast<std::size_t>(j)]);

  {
    // Near-singular weighted normal equations at the start point.
    const Eigen::VectorXd z = normalized(resid);
    const Eigen::MatrixXd j = jacobian(x);
    Eigen::VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) w(i) = problem.weight(z(i));
    const Eigen::MatrixXd a = j.transpose() * w.asDiagonal() * j;
    const Eigen::VectorXd d = a.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd corr = d.asDiagonal() * a * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.eigenvalues()(0) < 1e-14 * eig.eigenvalues()(n_active - 1)) {
      std::vector<int> cols;
      std::string names;
      for (Eigen::Index k = 0; k < n_active; ++k)
        if (std::abs(eig.eigenvectors()(k, 0)) > 0.3) {
          cols.push_back(active[static_cast<std::size_t>(k)]);
          names += (names.empty() ? "" : ", ") + ParamVector::name(cols.back());
        }
      throw SingularNormalEquations("normal equations are singular along: " + names, cols);
    }
  }

  LeastSquaresOptions ls;
  ls.robust = opts.robust;
  ls.huber_delta = opts.huber_delta;
  ls.relative_cost_tolerance = opts.relative_cost_tolerance;
  ls.step_tolerance = opts.step_tolerance;
  ls.initial_lambda = opts.initial_lambda;
  bool converged = false;
  std::string stop_reason = "iteration limit";

  for (int pass = 0; pass < std::max(opts.max_scale_passes, 1); ++pass) {
    ls.pass = pass;
    ls.max_iterations = opts.max_iterations - report.iterations;
    const LeastSquaresResult r = levenberg_marquardt(
        [&](const Eigen::VectorXd& v) { return normalized(problem.residual(expand(v))); },
        jacobian, x, ls);
    x = r.x;
    p = expand(x);
    resid = problem.residual(p);
    report.iterations += r.iterations;
    report.history.insert(report.history.end(), r.history.begin(), r.history.end());
    ls.initial_lambda = r.lambda;
    converged = r.converged;
    stop_reason = r.stop_reason;
    if (!converged) break;
    const Vec3 new_scale = robust_scale(resid, problem.floor());
    const double change = ((new_scale - scale).cwiseQuotient(scale)).cwiseAbs().maxCoeff();
    scale = new_scale;
    if (change < 0.05) break;
  }

  report.estimate = ParamVector(p);
  report.final_cost = problem.cost(resid, scale);
  report.initial_cost = problem.cost(problem.residual(init.values()), scale);
  report.converged = converged && report.final_cost <= report.initial_cost;
  report.stop_reason = stop_reason;
  report.residuals = diagnose(resid, scale, opts);
  return report;
}

}  // namespace gncbench::sysid
