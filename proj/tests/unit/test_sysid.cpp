#include "gncbench/sim/excitation.hpp"
#include "gncbench/sim/mission.hpp"
#include "gncbench/sysid/covariance.hpp"
#include "gncbench/sysid/fit.hpp"
#include "gncbench/sysid/huber.hpp"
#include "gncbench/sysid/least_squares.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace gncbench;
using namespace gncbench::sysid;
using test::perturbed_truth;
using test::relative_noise;
using test::vehicle;

namespace {

const KnownInertia kKnown{1.47, 810.44};

MissionLog simulate_log(double duration, const std::string& channels, std::uint64_t seed,
                        const NoiseModel& noise = {}) {
  const auto u = excitation_signal(duration, 0.01, ChannelMask::parse(channels), seed);
  return run_mission(vehicle(), noise, u, 0.01, seed);
}

/// Relative errors of the nonzero truth entries (dl, dc, diagonal of T).
std::vector<double> relative_errors(const ParamVector& est) {
  const ParamVector truth = ParamVector::pack(vehicle());
  std::vector<double> out;
  for (int i = 0; i < kParamCount; ++i)
    if (truth[i] != 0.0) out.push_back(std::abs(est[i] - truth[i]) / std::abs(truth[i]));
  return out;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST(Huber, Examples) {
  EXPECT_EQ(huber(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(huber(0.5, 1.0), 0.125);
  EXPECT_DOUBLE_EQ(huber(2.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(huber(-2.0, 1.0), 1.5);
  EXPECT_THROW(huber(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(huber(1.0, -1.0), std::invalid_argument);
}

TEST(Huber, ContinuousAndSmoothAtThreshold) {
  for (double delta : {0.1, 1.0, 3.0}) {
    const double h = 1e-9;
    const double below = huber(delta - h, delta);
    const double above = huber(delta + h, delta);
    EXPECT_NEAR(below, above, 3.0 * delta * h);
    const double slope_in = (huber(delta, delta) - huber(delta - h, delta)) / h;
    const double slope_out = (huber(delta + h, delta) - huber(delta, delta)) / h;
    EXPECT_NEAR(slope_in, delta, 1e-5);
    EXPECT_NEAR(slope_out, delta, 1e-5);
  }
}

TEST(Huber, WeightMatchesDerivativeOverResidual) {
  for (double r : {-5.0, -1.0, -0.3, 0.2, 0.9, 1.5, 40.0}) {
    const double h = 1e-6;
    const double dpsi = (huber(r + h, 1.0) - huber(r - h, 1.0)) / (2.0 * h);
    EXPECT_NEAR(huber_weight(r, 1.0), dpsi / r, 1e-6);
  }
  EXPECT_EQ(huber_weight(0.0, 1.0), 1.0);
}

TEST(LeastSquares, LinearProblemSolvedInOneIteration) {
  Rng rng(21);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(40, 5);
  Eigen::VectorXd b = Eigen::VectorXd::Random(40);
  const Eigen::VectorXd best = a.colPivHouseholderQr().solve(b);
  const double best_cost = 0.5 * (a * best - b).squaredNorm();
  LeastSquaresOptions opts;
  opts.robust = false;
  opts.initial_lambda = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x0(5);
    for (int i = 0; i < 5; ++i) x0(i) = test::uniform(rng, -100.0, 100.0);
    const auto r = levenberg_marquardt([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; },
                                       [&](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; }, x0, opts);
    ASSERT_GE(r.history.size(), 1u);
    EXPECT_NEAR(r.history.front().cost, best_cost, 1e-10 * (1.0 + best_cost));
    EXPECT_LE(r.iterations, 2);
    EXPECT_LT((r.x - best).norm(), 1e-9);
    EXPECT_TRUE(r.converged);
  }
}

TEST(LeastSquares, RobustLossDownweightsOutliers) {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(200, 0.0, 1.0);
  Eigen::MatrixXd a(200, 2);
  a.col(0).setOnes();
  a.col(1) = t;
  Eigen::VectorXd b = 1.0 + 2.0 * t.array();
  for (int i = 0; i < 200; i += 20) b(i) += 50.0;
  auto resid = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; };
  auto jac = [&](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
  LeastSquaresOptions robust;
  robust.huber_delta = 0.1;
  LeastSquaresOptions plain;
  plain.robust = false;
  const auto r = levenberg_marquardt(resid, jac, Eigen::Vector2d::Zero(), robust);
  const auto p = levenberg_marquardt(resid, jac, Eigen::Vector2d::Zero(), plain);
  EXPECT_LT((r.x - Eigen::Vector2d(1.0, 2.0)).norm(), 0.1);
  EXPECT_GT((p.x - Eigen::Vector2d(1.0, 2.0)).norm(), 1.0);
}

TEST(ParamVector, PackUnpackIsBijective) {
  DynamicParams p = vehicle();
  p.torque_map(2, 0) = 0.3;
  const ParamVector v = ParamVector::pack(p);
  EXPECT_EQ(v.values().size(), 15);
  EXPECT_EQ(v[torque_index(2, 0)], 0.3);
  const DynamicParams back = v.unpack(kKnown);
  EXPECT_EQ(back.dl, p.dl);
  EXPECT_EQ(back.dc, p.dc);
  EXPECT_EQ(back.torque_map, p.torque_map);
  EXPECT_EQ(back.mass, 1.47);
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    ParamArray raw;
    for (int i = 0; i < kParamCount; ++i) raw(i) = test::uniform(rng, -10.0, 10.0);
    EXPECT_EQ(ParamVector::pack(ParamVector(raw).unpack(kKnown)).values(), raw);
  }
  EXPECT_EQ(ParamVector::name(kDl + 1), "dl_y");
  EXPECT_EQ(ParamVector::name(kDc + 2), "dc_psi");
  EXPECT_EQ(ParamVector::name(torque_index(0, 1)), "T01");
}

TEST(PredictMeasurements, TrueModelReproducesNoiselessLog) {
  const MissionLog log = simulate_log(30.0, "x,y,psi", 3);
  const auto pred = predict_measurements(ParamVector::pack(vehicle()), kKnown, log);
  for (std::size_t k = 0; k < log.size(); ++k)
    ASSERT_LT((pred[k] - log.records[k].sensor.vec()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PredictMeasurements, ZeroControlsPredictZero) {
  MissionLog log = run_mission(vehicle(), NoiseModel{}, std::vector<ControlAction>(300), 0.01, 1);
  for (const auto& v : predict_measurements(perturbed_truth(0.2), kKnown, log)) ASSERT_TRUE(v.isZero(0.0));
}

TEST(PredictMeasurements, TrueModelResidualIsSensorNoise) {
  const MissionLog clean = simulate_log(60.0, "x,y,psi", 4);
  const NoiseModel n = relative_noise(clean, 0.2);
  const MissionLog log = simulate_log(60.0, "x,y,psi", 4, n);
  const auto pred = predict_measurements(ParamVector::pack(vehicle()), kKnown, log);
  Vec3 ss = Vec3::Zero();
  for (std::size_t k = 0; k < log.size(); ++k) ss += (log.records[k].sensor.vec() - pred[k]).cwiseAbs2();
  const Vec3 resid_rms = (ss / static_cast<double>(log.size())).cwiseSqrt();
  const Vec3 noise_std = n.q_meas.diagonal().cwiseSqrt();
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(resid_rms(c), noise_std(c), 0.03 * noise_std(c));
}

TEST(PredictMeasurements, UnstableCandidateThrows) {
  const MissionLog log = simulate_log(30.0, "x,psi", 3);
  ParamArray bad = ParamVector::pack(vehicle()).values();
  bad.segment<3>(kDl).setConstant(50.0);
  bad.segment<3>(kDc).setConstant(50.0);
  EXPECT_THROW(predict_measurements(ParamVector(bad), kKnown, log), NonFiniteSimulation);
  EXPECT_THROW(fit_dynamic(log, kKnown, ParamVector(bad)), DivergedSimulation);
}

TEST(FitDynamic, NoiselessRecoveryFromPerturbedStart) {
  const MissionLog log = simulate_log(60.0, "x,y,psi", 5);
  const FitReport rep = fit_dynamic(log, kKnown, perturbed_truth(0.2));
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(rep.unidentifiable.empty());
  EXPECT_LE(rep.final_cost, rep.initial_cost);
  for (double e : relative_errors(rep.estimate)) EXPECT_LT(e, 0.01);
  const ParamVector truth = ParamVector::pack(vehicle());
  for (int i = 0; i < kParamCount; ++i) {
    if (truth[i] == 0.0) {
      EXPECT_LT(std::abs(rep.estimate[i]), 1e-6) << ParamVector::name(i);
    }
  }
}

TEST(FitDynamic, CostHistoryIsMonotone) {
  const MissionLog clean = simulate_log(40.0, "x,y,psi", 6);
  const MissionLog log = simulate_log(40.0, "x,y,psi", 6, relative_noise(clean, 0.05));
  const FitReport rep = fit_dynamic(log, kKnown, default_initial_guess(kKnown));
  ASSERT_GE(rep.history.size(), 2u);
  for (std::size_t i = 1; i < rep.history.size(); ++i) {
    if (rep.history[i].pass == rep.history[i - 1].pass) {
      EXPECT_LE(rep.history[i].cost, rep.history[i - 1].cost);
    }
  }
  EXPECT_LE(rep.final_cost, rep.initial_cost);
}

TEST(FitDynamic, UnexcitedAxisIsFlaggedAndHeld) {
  const MissionLog log = simulate_log(60.0, "x,psi", 7);
  const ParamVector init = perturbed_truth(0.2);
  const FitReport rep = fit_dynamic(log, kKnown, init);
  const std::vector<int> expected = {kDl + 1, kDc + 1, torque_index(0, 1), torque_index(1, 1),
                                     torque_index(2, 1)};
  EXPECT_EQ(rep.unidentifiable, expected);
  for (int i : expected) EXPECT_EQ(rep.estimate[i], init[i]) << ParamVector::name(i);
  const ParamVector truth = ParamVector::pack(vehicle());
  for (int i : {kDl, kDl + 2, kDc, kDc + 2, torque_index(0, 0), torque_index(2, 2)})
    EXPECT_NEAR(rep.estimate[i], truth[i], 0.01 * std::abs(truth[i])) << ParamVector::name(i);

  FitOptions strict;
  strict.freeze_unidentifiable = false;
  try {
    fit_dynamic(log, kKnown, init, strict);
    FAIL() << "expected SingularNormalEquations";
  } catch (const SingularNormalEquations& e) {
    EXPECT_EQ(e.columns(), expected);
  }
}

TEST(FitDynamic, ErrorShrinksWithLessNoiseAndLongerLogs) {
  // Mean over seeds of the RMS relative error on the nonzero parameters.
  const std::vector<double> levels = {0.2, 0.05, 0.01};
  const std::vector<double> durations = {60.0, 240.0};
  double err[3][2];
  for (std::size_t d = 0; d < durations.size(); ++d)
    for (std::size_t l = 0; l < levels.size(); ++l) {
      double total = 0.0;
      for (std::uint64_t seed : {11u, 12u}) {
        const MissionLog clean = simulate_log(durations[d], "x,y,psi", seed);
        const MissionLog log = simulate_log(durations[d], "x,y,psi", seed, relative_noise(clean, levels[l]));
        total += rms(relative_errors(fit_dynamic(log, kKnown, perturbed_truth(0.2)).estimate));
      }
      err[l][d] = total / 2.0;
    }
  for (std::size_t d = 0; d < 2; ++d) {
    EXPECT_LT(err[1][d], err[0][d]) << "duration " << durations[d];
    EXPECT_LT(err[2][d], err[1][d]) << "duration " << durations[d];
  }
  for (std::size_t l = 0; l < 3; ++l) EXPECT_LT(err[l][1], err[l][0]) << "level " << levels[l];
}

TEST(FitDynamic, HuberLimitsOutlierInfluence) {
  const MissionLog clean = simulate_log(120.0, "x,y,psi", 13);
  const NoiseModel n = relative_noise(clean, 0.05);
  const MissionLog log = simulate_log(120.0, "x,y,psi", 13, n);
  MissionLog dirty = log;
  Rng rng(99);
  const Vec3 std_dev = n.q_meas.diagonal().cwiseSqrt();
  for (std::size_t k = 0; k < dirty.size(); ++k) {
    if (test::uniform(rng, 0.0, 1.0) >= 0.05) continue;
    auto& s = dirty.records[k].sensor;
    const double sign = test::uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    s.ax += sign * 10.0 * std_dev.x();
    s.ay += sign * 10.0 * std_dev.y();
    s.gyro_z += sign * 10.0 * std_dev.z();
  }
  FitOptions plain;
  plain.robust = false;
  auto change = [&](const FitOptions& opts) {
    const ParamArray a = fit_dynamic(log, kKnown, perturbed_truth(0.2), opts).estimate.values();
    const ParamArray b = fit_dynamic(dirty, kKnown, perturbed_truth(0.2), opts).estimate.values();
    const ParamArray scale = ParamVector::pack(vehicle()).values().cwiseAbs().cwiseMax(1.0);
    return ((b - a).cwiseQuotient(scale)).norm();
  };
  const double robust_change = change(FitOptions{});
  const double ls_change = change(plain);
  EXPECT_LT(robust_change, 5.0 * ls_change);
  EXPECT_LT(robust_change, ls_change);
}

TEST(FitDynamic, IndependentOfThreadSchedule) {
  const MissionLog clean = simulate_log(30.0, "x,y,psi", 14);
  const MissionLog log = simulate_log(30.0, "x,y,psi", 14, relative_noise(clean, 0.05));
  const FitReport a = fit_dynamic(log, kKnown, perturbed_truth(0.2));
  const FitReport b = fit_dynamic(log, kKnown, perturbed_truth(0.2));
  EXPECT_EQ(a.estimate.values(), b.estimate.values());
  EXPECT_EQ(a.final_cost, b.final_cost);
}

TEST(FitDynamic, RejectsShortLogs) {
  const MissionLog log = simulate_log(0.5, "x", 1);
  EXPECT_THROW(fit_dynamic(log, kKnown, perturbed_truth(0.2)), InsufficientSamples);
  const MissionLog short_log = simulate_log(5.0, "x", 1);
  EXPECT_THROW(fit_dynamic(short_log, kKnown, perturbed_truth(0.2)), InsufficientSamples);
}

TEST(Covariance, NoiselessTrueModelGivesZeroQAndDiscretizationOnlyR) {
  // The process model is first order in dt, so the noiseless one-step error
  // is O(dt^2) and R (its covariance over dt) vanishes linearly with dt.
  auto estimate = [](double dt) {
    const auto u = excitation_signal(60.0, dt, ChannelMask::parse("x,y,psi"), 15);
    const MissionLog log = run_mission(vehicle(), NoiseModel{}, u, dt, 15);
    return estimate_covariances(log, ParamVector::pack(vehicle()), kKnown);
  };
  const auto coarse = estimate(0.01);
  const auto fine = estimate(0.0025);
  EXPECT_FALSE(coarse.model_surrogate);
  EXPECT_LT(coarse.noise.q_meas.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(fine.noise.q_meas.cwiseAbs().maxCoeff(), 1e-8);
  const double r_coarse = coarse.noise.r_model.cwiseAbs().maxCoeff();
  const double r_fine = fine.noise.r_model.cwiseAbs().maxCoeff();
  EXPECT_LT(r_coarse, 1e-2);
  EXPECT_NEAR(r_coarse / r_fine, 4.0, 1.0);
}

TEST(Covariance, RecoversInjectedSensorCovariance) {
  NoiseModel n;
  n.q_meas = Vec3(2.852, 0.0, 0.008).asDiagonal();
  const MissionLog log = simulate_log(100.0, "x,psi", 16, n);
  ASSERT_EQ(log.size(), 10000u);
  const auto est = estimate_covariances(log, ParamVector::pack(vehicle()), kKnown);
  EXPECT_NEAR(est.noise.q_meas(0, 0), 2.852, 0.1 * 2.852);
  EXPECT_NEAR(est.noise.q_meas(2, 2), 0.008, 0.1 * 0.008);
  // ay carries no noise and no signal: the whole second row and column vanish.
  EXPECT_LT(est.noise.q_meas.row(1).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(est.noise.q_meas.col(1).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Covariance, OutputsAreSymmetricPsd) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    NoiseModel n;
    n.q_meas = Vec3(0.01 * (seed + 1), 0.002, 1e-4).asDiagonal();
    n.r_model.bottomRightCorner<3, 3>() = Vec3(1e-3, 1e-3, 1e-6).asDiagonal();
    MissionLog log = simulate_log(20.0, "x,y,psi", seed, n);
    for (bool with_truth : {true, false}) {
      if (!with_truth)
        for (auto& r : log.records) r.truth.reset();
      const auto est = estimate_covariances(log, perturbed_truth(0.1), kKnown);
      EXPECT_EQ(est.model_surrogate, !with_truth);
      EXPECT_NO_THROW(est.noise.validate());
      EXPECT_EQ(est.noise.q_meas, est.noise.q_meas.transpose());
      EXPECT_EQ(est.noise.r_model, est.noise.r_model.transpose());
    }
  }
}

TEST(Covariance, NeedsHundredRecords) {
  const MissionLog log = simulate_log(0.99, "x", 1);
  ASSERT_EQ(log.size(), 99u);
  EXPECT_THROW(estimate_covariances(log, ParamVector::pack(vehicle()), kKnown), InsufficientSamples);
}
