#include "gncbench/gnc/closed_loop.hpp"
#include "gncbench/gnc/pd_controller.hpp"
#include "gncbench/gnc/teach_repeat.hpp"
#include "gncbench/gnc/trajectory.hpp"
#include "gncbench/gnc/tuner.hpp"
#include "gncbench/dynamics/model.hpp"
#include "gncbench/sim/excitation.hpp"
#include "gncbench/sim/mission.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace gncbench;
using namespace gncbench::gnc;
using test::vehicle;

namespace {

constexpr double kPi = std::numbers::pi;

VehicleSetup perfect_setup() {
  VehicleSetup s;
  s.plant = vehicle();
  s.model = vehicle();
  s.perfect_state = true;
  return s;
}

VehicleSetup noisy_setup(std::uint64_t seed) {
  VehicleSetup s;
  s.plant = vehicle();
  s.model = vehicle();
  s.seed = seed;
  s.plant_noise.q_meas = Vec3(2.5e-3, 2.5e-3, 1e-6).asDiagonal();
  s.plant_noise.r_model.bottomRightCorner<3, 3>() = Vec3(1e-6, 1e-6, 1e-9).asDiagonal();
  s.filter_noise.q_meas = s.plant_noise.q_meas;
  Vec6 r;
  r << 1e-6, 1e-6, 1e-8, 1e-2, 1e-2, 1e-4;
  s.filter_noise.r_model = r.asDiagonal();
  return s;
}

std::vector<ControlSample> stream(double duration, double dt, ControlAction (*fn)(double)) {
  std::vector<ControlSample> out;
  for (long k = 0; static_cast<double>(k) * dt < duration - 1e-9; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.push_back({t, fn(t)});
  }
  return out;
}

Pose rotate_about_origin(const Pose& p, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return Pose::from_vec({c * p.x - s * p.y, s * p.x + c * p.y, p.psi + phi});
}

/// Taught sinuous-circle lap, noiseless, recorded from truth.
const ReferenceTrajectory& sinuous_lap() {
  static const ReferenceTrajectory traj = [] {
    SimVehicle v(perfect_setup());
    return teach(v, stream(test::kSinuousLap, 0.01, test::sinuous_circle_command)).trajectory;
  }();
  return traj;
}

/// One lap after three warm-up periods: periodic in pose and twist.
const ReferenceTrajectory& steady_sinuous_lap() {
  static const ReferenceTrajectory traj = [] {
    SimVehicle v(perfect_setup());
    const double warmup = 3.0 * test::kSinuousPeriod;
    const ReferenceTrajectory all =
        teach(v, stream(warmup + test::kSinuousLap + 0.005, 0.01, test::sinuous_circle_command)).trajectory;
    ReferenceTrajectory lap;
    const auto first = static_cast<std::ptrdiff_t>(std::lround(warmup / 0.01));
    lap.samples.assign(all.samples.begin() + first, all.samples.end());
    return lap;
  }();
  return traj;
}

}  // namespace

TEST(PdControl, ZeroErrorGivesZeroAction) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Pose p = Pose::from_vec(test::random_vec3(rng, 5.0));
    const double rate = test::uniform(rng, -1.0, 1.0);
    const ControlAction u = pd_control({3.0, 4.0, 5.0}, p, p, rate, rate);
    EXPECT_EQ(u.vec(), Vec3::Zero());
  }
}

TEST(PdControl, HandExample) {
  const ControlAction u = pd_control({0.5, 1.0, 1.0}, {1.0, 0.0, 0.0}, {}, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(u.ux(), 0.5);
  EXPECT_EQ(u.uy(), 0.0);
  EXPECT_EQ(u.upsi(), 0.0);
  // Target behind a vehicle facing +y shows up as a lateral error only.
  const ControlAction side = pd_control({0.5, 1.0, 0.0}, {1.0, 0.0, kPi / 2}, {0.0, 0.0, kPi / 2}, 0.0, 0.0);
  EXPECT_NEAR(side.ux(), 0.0, 1e-15);
  const ControlAction rate = pd_control({0.0, 0.0, 2.0}, {}, {}, 0.1, 0.3);
  EXPECT_NEAR(rate.upsi(), 0.4, 1e-15);
}

TEST(PdControl, SwayCommandIsAlwaysZero) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const PdGains g = PdGains::from_vec(test::random_vec3(rng, 100.0));
    const ControlAction u = pd_control(g, Pose::from_vec(test::random_vec3(rng, 10.0)),
                                       Pose::from_vec(test::random_vec3(rng, 10.0)),
                                       test::uniform(rng, -1, 1), test::uniform(rng, -1, 1));
    ASSERT_EQ(u.uy(), 0.0);
    ASSERT_LE(u.vec().cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(PdControl, EquivariantUnderFrameRotation) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const PdGains g{test::uniform(rng, 0.0, 0.5), test::uniform(rng, 0.0, 0.5), test::uniform(rng, 0.0, 0.5)};
    const Pose ref = Pose::from_vec(test::random_vec3(rng, 1.0));
    const Pose est = Pose::from_vec(test::random_vec3(rng, 1.0));
    const double phi = test::uniform(rng, -kPi, kPi);
    const Vec3 a = pd_control(g, ref, est, 0.1, 0.2).vec();
    const Vec3 b = pd_control(g, rotate_about_origin(ref, phi), rotate_about_origin(est, phi), 0.1, 0.2).vec();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PdControl, HeadingErrorIsWrapped) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    Pose ref{0.0, 0.0, test::uniform(rng, -50.0, 50.0)};
    Pose est{0.0, 0.0, test::uniform(rng, -50.0, 50.0)};
    ref.psi = ref.psi;  // raw, unwrapped on purpose
    const double e = body_error(ref, est).z();
    EXPECT_GT(e, -kPi);
    EXPECT_LE(e, kPi);
    EXPECT_NEAR(std::remainder(e - (ref.psi - est.psi), 2 * kPi), 0.0, 1e-9);
  }
}

TEST(PdControl, RejectsNonFiniteGains) {
  PdGains g;
  g.beta = std::numeric_limits<double>::infinity();
  EXPECT_THROW(g.validate(), std::invalid_argument);
  EXPECT_THROW(pd_control(g, {}, {}, 0.0, 0.0), std::invalid_argument);
}

TEST(Trajectory, InterpolatesAlongShortestArc) {
  ReferenceTrajectory t;
  t.samples = {{0.0, {0.0, 0.0, kPi - 0.1}, {0.1, 0.0, 0.2}}, {1.0, {1.0, 2.0, -kPi + 0.1}, {0.3, 0.0, 0.2}}};
  const TrajectorySample mid = t.at(0.5);
  EXPECT_NEAR(mid.pose.x, 0.5, 1e-15);
  EXPECT_NEAR(mid.pose.y, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(mid.pose.psi), kPi, 1e-12);
  EXPECT_NEAR(mid.vel.vx, 0.2, 1e-15);
  EXPECT_EQ(t.at(-5.0).pose.x, 0.0);
  EXPECT_EQ(t.at(9.0).pose.x, 1.0);
  EXPECT_NEAR(t.path_length(), std::sqrt(5.0), 1e-15);
}

TEST(Trajectory, ValidateRejectsBrokenInput) {
  ReferenceTrajectory t;
  EXPECT_THROW(t.validate(), InvalidTrajectory);
  t.samples = {{0.0, {}, {}}, {0.0, {}, {}}};
  EXPECT_THROW(t.validate(), InvalidTrajectory);
  t.samples = {{0.0, {}, {}}, {0.1, {5.0, 0.0, 0.0}, {}}};
  EXPECT_THROW(t.validate(), InvalidTrajectory);
  t.samples = {{0.0, {}, {}}, {0.1, {std::nan(""), 0.0, 0.0}, {}}};
  EXPECT_THROW(t.validate(), InvalidTrajectory);
  EXPECT_NO_THROW(straight_line({}, 0.1, 10.0, 0.01).validate());
}

TEST(Trajectory, FileRoundTrip) {
  const ReferenceTrajectory t = straight_line({1.0, 2.0, 0.7}, 0.1, 3.0, 0.01);
  const auto dir = test::temp_dir("trajectory");
  save_trajectory(dir / "a.traj", t);
  const ReferenceTrajectory back = load_trajectory(dir / "a.traj");
  ASSERT_EQ(back.samples.size(), t.samples.size());
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].t, t.samples[i].t);
    EXPECT_EQ(back.samples[i].pose.vec(), t.samples[i].pose.vec());
    EXPECT_EQ(back.samples[i].vel.vec(), t.samples[i].vel.vec());
  }
  EXPECT_EQ(trajectory_to_table(t).columns, (std::vector<std::string>{"t", "x", "y", "psi", "vx", "vy", "vpsi"}));
}

TEST(Trajectory, Generators) {
  const ReferenceTrajectory line = straight_line({0.0, 0.0, kPi / 2}, 0.2, 5.0, 0.01);
  EXPECT_NEAR(line.samples.back().pose.y, 1.0, 1e-9);
  EXPECT_NEAR(line.samples.back().pose.x, 0.0, 1e-9);
  EXPECT_NEAR(line.path_length(), 1.0, 1e-9);
  const ReferenceTrajectory hold = hold_position({1.0, 1.0, 0.0}, 2.0, 0.01);
  EXPECT_EQ(hold.path_length(), 0.0);
  EXPECT_NEAR(hold.duration(), 2.0, 1e-9);
}

TEST(CrossTrack, DistanceToPolyline) {
  ReferenceTrajectory t;
  t.samples = {{0.0, {0.0, 0.0, 0.0}, {}}, {1.0, {1.0, 0.0, 0.0}, {}}, {2.0, {1.0, 1.0, 0.0}, {}}};
  EXPECT_NEAR(cross_track_error(t, 0.5, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(cross_track_error(t, 0.5, -0.3), 0.3, 1e-15);
  EXPECT_NEAR(cross_track_error(t, 1.2, 0.5), 0.2, 1e-15);
  EXPECT_NEAR(cross_track_error(t, -3.0, 4.0), 5.0, 1e-15);
  EXPECT_EQ(cross_track_error(t, 1.0, 0.5), 0.0);
}

TEST(Tuner, TerminalSpeedsMatchForceBalance) {
  const Vec3 v = terminal_speeds(vehicle());
  // Roots of dl v + dc v|v| + T = 0, by bisection.
  auto root = [](double dl, double dc, double t) {
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (lo + hi);
      (dl * m + dc * m * m + t > 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  };
  EXPECT_NEAR(v.x(), root(-7.0, -3.5, 1.0), 1e-8);
  EXPECT_NEAR(v.y(), root(-7.0, -3.5, 1.0), 1e-8);
  EXPECT_NEAR(v.z(), root(-500.553, -250.0, 29.99), 1e-8);
  EXPECT_NEAR(v.x(), 0.1339, 1e-4);
  EXPECT_NEAR(v.z(), 0.0582, 1e-4);
}

TEST(Tuner, HoldPositionCostsNothing) {
  const TuneResult r = tune_gains(vehicle(), hold_position({0.3, -0.2, 1.0}, 10.0, 0.01));
  EXPECT_LT(r.best.cost, 1e-6);
  EXPECT_TRUE(r.best.bounded);
}

TEST(Tuner, StraightLineIsTrackedClosely) {
  const ReferenceTrajectory line = straight_line({}, 0.1, 60.0, 0.01);
  const TuneResult r = tune_gains(vehicle(), line);
  EXPECT_LT(r.best.rms_position_error, 0.05);
  // Independent re-simulation of the returned gains.
  const ClosedLoopResult check = simulate_tracking(vehicle(), line, r.gains);
  EXPECT_EQ(check.cost, r.best.cost);
  EXPECT_LT(check.rms_position_error, 0.05);
  EXPECT_TRUE(stabilizes(vehicle(), r.gains));
}

TEST(Tuner, RejectsReferenceFasterThanThePlant) {
  EXPECT_THROW(tune_gains(vehicle(), straight_line({}, 1.0, 10.0, 0.01)), InfeasibleTrajectory);
  ReferenceTrajectory spin = hold_position({}, 10.0, 0.01);
  for (auto& s : spin.samples) s.vel.vpsi = 0.5;
  EXPECT_THROW(tune_gains(vehicle(), spin), InfeasibleTrajectory);
}

TEST(Tuner, BestIsNoWorseThanAnyCandidate) {
  const TuneResult r = tune_gains(vehicle(), straight_line({}, 0.08, 30.0, 0.01));
  ASSERT_EQ(r.candidates.size(), r.evaluations);
  for (const auto& [gains, cost] : r.candidates) EXPECT_LE(r.best.cost, cost);
}

TEST(Tuner, Deterministic) {
  const ReferenceTrajectory line = straight_line({0.0, 0.0, 0.4}, 0.08, 20.0, 0.01);
  const TuneResult a = tune_gains(vehicle(), line);
  const TuneResult b = tune_gains(vehicle(), line);
  EXPECT_EQ(a.gains.vec(), b.gains.vec());
  EXPECT_EQ(a.best.cost, b.best.cost);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Tuner, LocallyOptimalUnderGainPerturbations) {
  const ReferenceTrajectory& lap = sinuous_lap();
  ReferenceTrajectory part;
  part.samples.assign(lap.samples.begin(), lap.samples.begin() + 4001);
  const GainSearchSpace space;
  const TuneResult r = tune_gains(vehicle(), part, space);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    Vec3 g = r.gains.vec();
    for (int j = 0; j < 3; ++j) g(j) *= 1.0 + test::uniform(rng, -0.5, 0.5);
    g = g.cwiseMax(space.lower).cwiseMin(space.upper);
    EXPECT_LE(r.best.cost, simulate_tracking(vehicle(), part, PdGains::from_vec(g)).cost) << g.transpose();
  }
}

TEST(SimVehicle, OpenLoopMatchesMission) {
  const auto u = excitation_signal(20.0, 0.01, ChannelMask::parse("x,psi"), 6);
  VehicleSetup s = noisy_setup(9);
  const MissionLog mission = run_mission(s.plant, s.plant_noise, u, s.dt, s.seed);
  SimVehicle v(s);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const LogRecord r = v.tick(u[k]);
    ASSERT_EQ(r.t, mission.records[k].t);
    ASSERT_EQ(r.sensor.vec(), mission.records[k].sensor.vec());
    ASSERT_EQ(r.truth->state.vel.vec(), mission.records[k].truth->state.vel.vec());
  }
}

TEST(SimVehicle, RejectsBadSetup) {
  VehicleSetup s = perfect_setup();
  s.dt = 0.5;
  EXPECT_THROW(SimVehicle{s}, std::invalid_argument);
  s = perfect_setup();
  s.model.mass = -1.0;
  EXPECT_THROW(SimVehicle{s}, InvalidParams);
}

TEST(Teach, ZeroStreamRecordsIdenticalPoses) {
  SimVehicle v(perfect_setup());
  const auto zero = stream(5.0, 0.01, [](double) { return ControlAction{}; });
  const TeachResult r = teach(v, zero);
  ASSERT_EQ(r.trajectory.samples.size(), zero.size());
  for (const auto& s : r.trajectory.samples) EXPECT_EQ(s.pose.vec(), Vec3::Zero());
}

TEST(Teach, TimestampsEqualControlTimestamps) {
  SimVehicle v(noisy_setup(2));
  const auto cs = stream(3.0, 0.01, test::sinuous_circle_command);
  const TeachResult r = teach(v, cs, TeachSource::estimate);
  ASSERT_EQ(r.trajectory.samples.size(), cs.size());
  ASSERT_EQ(r.log.size(), cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) {
    EXPECT_EQ(r.trajectory.samples[k].t, cs[k].t);
    EXPECT_EQ(r.log.records[k].t, cs[k].t);
    EXPECT_EQ(r.log.records[k].u, cs[k].u);
  }
}

TEST(Teach, ConstantCommandCircleCloses) {
  // Full-lap duration from the steady yaw rate of the force balance.
  const double upsi = 0.8;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double w = 0.5 * (lo + hi);
    (-500.553 * w - 250.0 * w * w + 29.99 * upsi > 0.0 ? lo : hi) = w;
  }
  const double lap = 2.0 * kPi / (0.5 * (lo + hi));
  SimVehicle v(perfect_setup());
  const auto cs = stream(lap, 0.01, [](double) { return ControlAction(0.7, 0.0, 0.8); });
  const TeachResult r = teach(v, cs);
  const auto& s = r.trajectory.samples;
  const double gap = std::hypot(s.back().pose.x - s.front().pose.x, s.back().pose.y - s.front().pose.y);
  EXPECT_LT(gap, 0.05 * r.trajectory.path_length());
}

TEST(Teach, SinuousCircleCloses) {
  const auto& s = sinuous_lap().samples;
  const double gap = std::hypot(s.back().pose.x - s.front().pose.x, s.back().pose.y - s.front().pose.y);
  EXPECT_LT(gap, 0.05 * sinuous_lap().path_length());
  EXPECT_GT(sinuous_lap().path_length(), 10.0);
}

TEST(Repeat, PerfectStateStraightLineHasSmallCrossTrack) {
  VehicleSetup setup = perfect_setup();
  setup.initial.pose.psi = kPi / 6;
  SimVehicle teacher(setup);
  const auto cs = stream(60.0, 0.01, [](double) { return ControlAction(0.6, 0.0, 0.0); });
  const ReferenceTrajectory taught = teach(teacher, cs).trajectory;
  const PdGains gains = tune_gains(vehicle(), taught).gains;

  // Exact start: the path is reproduced.
  SimVehicle exact(setup);
  EXPECT_LT(repeat(exact, taught, gains).cross_track_rms, 1e-9);

  // Heading error at the start and a process disturbance on the plant.
  setup.initial.pose.psi += 0.05;
  setup.plant_noise.r_model.bottomRightCorner<3, 3>() = Vec3(1e-4, 1e-4, 1e-7).asDiagonal();
  SimVehicle v(setup);
  const RepeatReport rep = repeat(v, taught, gains);
  EXPECT_GT(rep.cross_track_rms, 1e-4);
  EXPECT_LT(rep.cross_track_rms, 0.02);
  EXPECT_EQ(rep.velocity_rmse, 0.0);
  EXPECT_EQ(rep.final_drift, 0.0);
}

TEST(Repeat, EstimatedStateTracksSinuousCircleAndReportsDrift) {
  const PdGains gains{90.0, 200.0, 200.0};
  SimVehicle v(noisy_setup(11));
  const RepeatReport rep = repeat(v, sinuous_lap(), gains);
  EXPECT_EQ(rep.steps.size(), sinuous_lap().samples.size());
  EXPECT_LT(rep.cross_track_rms, 0.05);
  EXPECT_GT(rep.velocity_rmse, 0.0);
  EXPECT_GE(rep.max_drift, rep.final_drift);
  EXPECT_TRUE(std::isfinite(rep.final_drift));
}

TEST(Repeat, LoopBlendFadesClosureGap) {
  // Straight path x = t over 10 s, so the gap from end back to start is 10 m.
  ReferenceTrajectory line;
  for (int k = 0; k <= 100; ++k) {
    TrajectorySample s;
    s.t = 0.1 * k;
    s.pose = {s.t, 0.0, 0.0};
    s.vel = {1.0, 0.0, 0.0};
    line.samples.push_back(s);
  }
  RepeatOptions opts;
  opts.loop = true;
  opts.blend_s = 2.0;
  EXPECT_NEAR(reference_at(line, 4.0, opts).pose.x, 4.0, 1e-12);
  EXPECT_NEAR(reference_at(line, 10.0 + 1e-9, opts).pose.x, 10.0, 1e-6);
  // Half way through the blend: 0.5 along the path plus three quarters of the gap.
  EXPECT_NEAR(reference_at(line, 10.5, opts).pose.x, 0.5 + 0.75 * 10.0, 1e-9);
  EXPECT_NEAR(reference_at(line, 12.0, opts).pose.x, 2.0, 1e-9);
  EXPECT_NEAR(reference_at(line, 13.0, opts).pose.x, 3.0, 1e-12);
  EXPECT_NEAR(reference_at(line, 10.5, opts).vel.vx, 1.0, 1e-12);
  opts.loop = false;
  EXPECT_NEAR(reference_at(line, 10.5, opts).pose.x, 10.0, 1e-12);
}

TEST(Repeat, LoopWrapIsContinuous) {
  const ReferenceTrajectory& lap_traj = steady_sinuous_lap();
  const double lap = lap_traj.duration();
  ASSERT_NEAR(lap, test::kSinuousLap, 0.011);
  const auto& s = lap_traj.samples;
  ASSERT_LT(std::hypot(s.back().pose.x - s.front().pose.x, s.back().pose.y - s.front().pose.y), 0.01);

  const PdGains gains{90.0, 200.0, 200.0};
  RepeatOptions opts;
  opts.loop = true;
  opts.laps = 3;
  VehicleSetup setup = perfect_setup();
  setup.initial.pose = s.front().pose;
  setup.initial.vel = s.front().vel;
  SimVehicle v(setup);
  const RepeatReport rep = repeat(v, lap_traj, gains, opts);
  EXPECT_NEAR(rep.steps.back().t, 3 * lap, 0.02);

  // Largest tick-to-tick command change near each wrap vs. elsewhere.
  double interior = 0.0;
  double at_wrap = 0.0;
  for (std::size_t k = 1; k < rep.steps.size(); ++k) {
    const double jump = (rep.steps[k].u.vec() - rep.steps[k - 1].u.vec()).cwiseAbs().maxCoeff();
    const double phase = std::fmod(rep.steps[k].t, lap);
    const bool near_wrap = rep.steps[k].t > lap / 2 && (phase < 2.0 || phase > lap - 2.0);
    double& slot = near_wrap ? at_wrap : interior;
    slot = std::max(slot, jump);
  }
  EXPECT_LE(at_wrap, std::max(interior, 0.05)) << "interior " << interior;

  for (int n = 1; n < 3; ++n) {
    const TrajectorySample before = reference_at(lap_traj, n * lap - 1e-6, opts);
    const TrajectorySample after = reference_at(lap_traj, n * lap + 1e-6, opts);
    EXPECT_LT((before.pose.vec() - after.pose.vec()).head<2>().norm(), 1e-4);
    EXPECT_LT(std::abs(angle_diff(before.pose.psi, after.pose.psi)), 1e-4);
    EXPECT_LT((before.vel.vec() - after.vel.vec()).norm(), 1e-4);
  }
}

TEST(Repeat, AbortsWhenCrossTrackExceedsBound) {
  VehicleSetup s = perfect_setup();
  s.initial.pose = {0.0, 2.0, 0.0};
  SimVehicle v(s);
  RepeatOptions opts;
  opts.abort_cross_track = 1.0;
  try {
    repeat(v, straight_line({}, 0.1, 10.0, 0.01), {20.0, 40.0, 40.0}, opts);
    FAIL() << "expected TrackingDiverged";
  } catch (const TrackingDiverged& e) {
    EXPECT_EQ(e.time(), 0.0);
  }
}
