#include "gncbench/dynamics/params_io.hpp"
#include "gncbench/ekf/ekf.hpp"
#include "gncbench/ekf/trace_io.hpp"
#include "gncbench/gnc/trajectory.hpp"
#include "gncbench/gnc/tuner.hpp"
#include "gncbench/runtime/config.hpp"
#include "gncbench/runtime/runtime.hpp"
#include "gncbench/runtime/script.hpp"
#include "gncbench/runtime/server.hpp"
#include "gncbench/sim/excitation.hpp"
#include "gncbench/sim/mission.hpp"
#include "gncbench/sysid/covariance.hpp"
#include "gncbench/sysid/fit.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cmath>
#include <fstream>
#include <iostream>

using namespace gncbench;
namespace rt = gncbench::runtime;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitPortInUse = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

rt::WorkbenchConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    rt::WorkbenchConfig cfg = rt::default_config();
    rt::apply_env_overrides(cfg);
    return cfg;
  }
  return rt::load_config(path);
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string fmt(double v) { return format_number(v); }

std::string vec_text(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v(i));
  return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, channels = "x,y,psi", out;
  double duration = 0.0;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  const rt::WorkbenchConfig cfg = config_or_default(a.config);
  ChannelMask mask;
  try {
    mask = ChannelMask::parse(a.channels);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--channels: ") + e.what());
  }
  if (!(a.duration > 0.0)) throw UsageError("--duration must be positive");
  const std::uint64_t seed = a.seed.value_or(cfg.seed);
  const auto controls = excitation_signal(a.duration, cfg.dt, mask, seed);
  const MissionLog log = run_mission(cfg.params, cfg.noise, controls, cfg.dt, seed);
  std::filesystem::path out(a.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  save_log(out, log);

  Vec3 rms = Vec3::Zero(), peak = Vec3::Zero();
  for (const auto& r : log.records) {
    rms += r.sensor.vec().cwiseAbs2();
    peak = peak.cwiseMax(r.truth->state.vel.vec().cwiseAbs());
  }
  rms = (rms / static_cast<double>(log.size())).cwiseSqrt();
  std::cout << "records " << log.size() << "\n"
            << "duration_s " << fmt(static_cast<double>(log.size()) * cfg.dt) << "\n"
            << "seed " << seed << "\n"
            << "sensor_rms " << vec_text(rms) << "\n"
            << "peak_speed " << vec_text(peak) << "\n"
            << "wrote " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- identify

struct IdentifyArgs {
  std::string log, init, config, out_params, out_noise;
  double mass = 0.0, inertia = 0.0;
  bool plain = false;
};

sysid::KnownInertia known_inertia(double mass, double inertia, const std::string& config) {
  sysid::KnownInertia k;
  if (!config.empty()) {
    const rt::WorkbenchConfig cfg = rt::load_config(config);
    k = {cfg.params.mass, cfg.params.inertia};
  }
  if (mass > 0.0) k.mass = mass;
  if (inertia > 0.0) k.inertia = inertia;
  if (!(k.mass > 0.0 && k.inertia > 0.0) || (config.empty() && (mass <= 0.0 || inertia <= 0.0)))
    throw UsageError("give --mass and --inertia (or --config)");
  return k;
}

void note_unobservable(const MissionLog& log, const std::vector<int>& unidentifiable) {
  if (unidentifiable.empty()) return;
  const char* axis[] = {"x", "y", "psi"};
  for (int j = 0; j < 3; ++j) {
    bool excited = false;
    for (const auto& r : log.records) excited = excited || r.u.vec()(j) != 0.0;
    if (!excited)
      std::cerr << "note: no control signal enters the " << axis[j]
                << " direction, so the parameters related to it are not observable\n";
  }
  std::cerr << "note: held at their initial values:";
  for (int i : unidentifiable) std::cerr << ' ' << sysid::ParamVector::name(i);
  std::cerr << '\n';
}

int cmd_identify(const IdentifyArgs& a) {
  const MissionLog log = load_log(a.log);
  const sysid::KnownInertia known = known_inertia(a.mass, a.inertia, a.config);
  const sysid::ParamVector init = a.init.empty() ? sysid::default_initial_guess(known)
                                                 : sysid::ParamVector::pack(load_params(a.init));
  sysid::FitOptions opts;
  opts.robust = !a.plain;
  const sysid::FitReport rep = sysid::fit_dynamic(log, known, init, opts);

  std::cout << "converged " << (rep.converged ? "yes" : "no") << "\n"
            << "stop_reason " << rep.stop_reason << "\n"
            << "iterations " << rep.iterations << "\n"
            << "initial_cost " << fmt(rep.initial_cost) << "\n"
            << "final_cost " << fmt(rep.final_cost) << "\n"
            << "sum_squared_residual "
            << fmt(static_cast<double>(log.size()) * rep.residuals.rms.squaredNorm()) << "\n"
            << "residual_rms " << vec_text(rep.residuals.rms) << "\n"
            << "residual_scale " << vec_text(rep.residuals.scale) << "\n"
            << "downweighted_fraction " << fmt(rep.residuals.downweighted_fraction) << "\n";
  for (int i = 0; i < sysid::kParamCount; ++i)
    std::cout << sysid::ParamVector::name(i) << ' ' << fmt(rep.estimate[i]) << "\n";
  note_unobservable(log, rep.unidentifiable);

  const DynamicParams p = rep.estimate.unpack(known);
  write_json(a.out_params, params_to_json(p));
  std::cout << "wrote " << a.out_params << "\n";
  if (!a.out_noise.empty()) {
    const auto cov = sysid::estimate_covariances(log, rep.estimate, known);
    save_noise(a.out_noise, cov.noise);
    if (cov.model_surrogate)
      std::cerr << "note: no ground truth in the log; R is from a sensor-derived reference\n";
    std::cout << "wrote " << a.out_noise << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- estimate-cov

struct EstimateCovArgs {
  std::string log, params, out;
  int window = 5;
};

int cmd_estimate_cov(const EstimateCovArgs& a) {
  const MissionLog log = load_log(a.log);
  const DynamicParams p = load_params(a.params);
  sysid::CovarianceOptions opts;
  opts.smoothing_window = a.window;
  const auto cov = sysid::estimate_covariances(log, sysid::ParamVector::pack(p),
                                               {p.mass, p.inertia}, opts);
  save_noise(a.out, cov.noise);
  write_noise(std::cout, cov.noise);
  std::cout << "samples " << cov.samples << "\n"
            << "model_surrogate " << (cov.model_surrogate ? "yes" : "no") << "\n";
  return 0;
}

// ---------------------------------------------------------------- tune

struct TuneArgs {
  std::string params, trajectory, out;
  int grid = 7, refinements = 6;
  double dt = 0.01;
};

int cmd_tune(const TuneArgs& a) {
  const DynamicParams p = load_params(a.params);
  const gnc::ReferenceTrajectory traj = gnc::load_trajectory(a.trajectory);
  gnc::GainSearchSpace space;
  space.grid_points = a.grid;
  space.refinements = a.refinements;
  gnc::TuneOptions opts;
  opts.dt = a.dt;
  const gnc::TuneResult r = gnc::tune_gains(p, traj, space, opts);
  std::cout << "alpha " << fmt(r.gains.alpha) << "\n"
            << "beta " << fmt(r.gains.beta) << "\n"
            << "gamma " << fmt(r.gains.gamma) << "\n"
            << "cost " << fmt(r.best.cost) << "\n"
            << "rms_position_error " << fmt(r.best.rms_position_error) << "\n"
            << "evaluations " << r.evaluations << "\n"
            << "stable " << (gnc::stabilizes(p, r.gains) ? "yes" : "no") << "\n";
  if (r.lateral_demand_rms > 1e-6)
    std::cerr << "note: the reference asks for sway velocity (rms " << fmt(r.lateral_demand_rms)
              << " m/s) that the vehicle cannot actuate; that error is irreducible\n";
  nlohmann::ordered_json doc;
  doc["alpha"] = r.gains.alpha;
  doc["beta"] = r.gains.beta;
  doc["gamma"] = r.gains.gamma;
  write_json(a.out, doc);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config, mode = "teach", script, save = "taught", trajectory, name, out_dir;
  double duration = 0.0;
  int laps = 1;
  bool serve = false;
};

Table repeat_table(const std::vector<gnc::RepeatStep>& steps) {
  Table t;
  t.columns = {"t",      "ref_x", "ref_y", "ref_psi", "ref_vx", "ref_vy", "ref_vpsi", "est_x",
               "est_y",  "est_psi", "x",   "y",       "psi",    "ux",     "upsi",     "cross_track"};
  for (const auto& s : steps)
    t.rows.push_back({s.t, s.ref.pose.x, s.ref.pose.y, s.ref.pose.psi, s.ref.vel.vx, s.ref.vel.vy,
                      s.ref.vel.vpsi, s.nav_pose.x, s.nav_pose.y, s.nav_pose.psi, s.truth.pose.x,
                      s.truth.pose.y, s.truth.pose.psi, s.u.ux(), s.u.upsi(), s.cross_track});
  return t;
}

int cmd_run(const RunArgs& a) {
  const rt::WorkbenchConfig cfg = config_or_default(a.config);
  rt::Runtime runtime(cfg);
  rt::LoopLimits limits;
  limits.duration = a.duration;
  limits.stop = &g_stop;

  if (a.mode == "teach") {
    if (a.script.empty() && !a.serve)
      throw UsageError("teach mode needs a command source: --script FILE or --serve for a teleop client");
    if (!rt::valid_trajectory_name(a.save))
      throw UsageError("--save: trajectory names use 1-64 characters of A-Z a-z 0-9 _ -");
  } else if (a.mode == "repeat") {
    if (a.trajectory.empty()) throw UsageError("repeat mode needs --trajectory NAME");
  } else if (a.mode != "idle") {
    throw UsageError("--mode must be teach, repeat or idle");
  }
  if (!a.serve && a.mode != "teach" && a.duration <= 0.0 && !(a.mode == "repeat" && a.laps > 0))
    throw UsageError("a headless run needs --duration or a finite --laps");

  std::unique_ptr<rt::WireServer> server;
  if (a.serve) {
    server = std::make_unique<rt::WireServer>(runtime.inbound(), runtime.outbound());
    server->start(cfg.port);
    std::cerr << "serving ws://127.0.0.1:" << server->port() << "\n";
  }

  if (a.mode == "teach" && !a.script.empty()) {
    runtime.start_scripted_teach(rt::expand_script(rt::load_script(a.script), cfg.dt));
    limits.stop_after_script = true;
  } else if (a.mode == "teach") {
    runtime.inbound().push({rt::InboundEvent::Kind::message, rt::ModeMsg{rt::Mode::teach, ""}});
  } else if (a.mode == "repeat") {
    gnc::RepeatOptions opts;
    opts.loop = a.laps != 1;
    opts.laps = a.laps;
    runtime.start_repeat(a.trajectory, opts);
    limits.stop_after_repeat = true;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  rt::run_loop(runtime, limits);
  if (server) server->stop();
  // Drop the replies the loop queued for a client that is gone.
  runtime.outbound().drain();

  const std::string name = a.name.empty() ? a.mode : a.name;
  const std::filesystem::path dir =
      a.out_dir.empty() ? cfg.data_dir / "runs" / name : std::filesystem::path(a.out_dir);
  std::filesystem::create_directories(dir);
  save_log(dir / "log.txt", runtime.log());
  save_table(dir / "trace.txt", ekf::trace_to_table(runtime.log(), runtime.trace()));

  nlohmann::ordered_json summary;
  summary["mode"] = a.mode;
  summary["ticks"] = runtime.tick_index();
  summary["t_end"] = runtime.time();
  if (a.mode == "teach" && !a.script.empty()) {
    const auto path = runtime.save_recording(a.save);
    summary["trajectory"] = path.string();
    summary["path_length"] = runtime.recorded().path_length();
    std::cout << "wrote " << path.string() << "\n";
  }
  int code = 0;
  if (a.mode == "repeat") {
    const auto& steps = runtime.repeat_steps();
    save_table(dir / "repeat.txt", repeat_table(steps));
    double vel_sq = 0.0, track_sq = 0.0, ct_sq = 0.0;
    for (const auto& s : steps) {
      vel_sq += (s.nav_vel.vec() - s.truth.vel.vec()).squaredNorm();
      track_sq += (s.ref.vel.vec() - s.truth.vel.vec()).squaredNorm();
      ct_sq += s.cross_track * s.cross_track;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, steps.size()));
    const auto& v = runtime.vehicle();
    summary["velocity_rmse"] = std::sqrt(vel_sq / n);
    summary["tracking_rmse"] = std::sqrt(track_sq / n);
    summary["cross_track_rms"] = std::sqrt(ct_sq / n);
    summary["final_drift"] = std::hypot(v.estimated_pose().x - v.truth().pose.x,
                                        v.estimated_pose().y - v.truth().pose.y);
    if (runtime.fault()) {
      summary["fault"] = *runtime.fault();
      std::cerr << "error: repeat aborted: " << *runtime.fault() << "\n";
      code = kExitDiverged;
    }
  }
  write_json(dir / "summary.json", summary);
  for (const auto& item : summary.items()) {
    std::cout << item.key() << ' ';
    if (item.value().is_number_float()) {
      std::cout << fmt(item.value().get<double>());
    } else if (item.value().is_string()) {
      std::cout << item.value().get<std::string>();
    } else {
      std::cout << item.value().dump();
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return code;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
  std::string log, config, params, noise, out;
  bool open_loop = false;
};

int cmd_replay(const ReplayArgs& a) {
  const rt::WorkbenchConfig cfg = config_or_default(a.config);
  const MissionLog log = load_log(a.log);
  const DynamicParams p = a.params.empty() ? cfg.params : load_params(a.params);
  const NoiseModel noise = a.noise.empty() ? cfg.noise : load_noise(a.noise);
  ekf::FilterOptions opts;
  opts.apply_updates = !a.open_loop;
  const auto trace = ekf::run_filter(log, p, noise, rt::Runtime::initial_belief(), opts);
  save_table(a.out, ekf::trace_to_table(log, trace));
  std::cout << "records " << trace.size() << "\n";
  if (log.has_truth()) {
    double sq = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k)
      sq += (trace[k].state.mu.head<3>() - log.records[k].truth->state.vel.vec()).squaredNorm();
    const auto& last = log.records.back().truth->state.pose;
    std::cout << "velocity_rmse " << fmt(std::sqrt(sq / static_cast<double>(trace.size()))) << "\n"
              << "final_drift "
              << fmt(std::hypot(trace.back().pose.x - last.x, trace.back().pose.y - last.y))
              << "\n";
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- plot-export

struct PlotExportArgs {
  std::string input, output, columns;
};

int cmd_plot_export(const PlotExportArgs& a) {
  const Table table = load_table(a.input);
  std::vector<int> idx;
  if (a.columns.empty()) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) idx.push_back(static_cast<int>(i));
  } else {
    std::stringstream ss(a.columns);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const int c = table.column(name);
      if (c < 0) throw UsageError("--columns: '" + name + "' is not a column of " + a.input);
      idx.push_back(c);
    }
  }
  std::filesystem::path out(a.output);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + a.output);
  for (std::size_t i = 0; i < idx.size(); ++i) f << (i ? "," : "") << table.columns[idx[i]];
  f << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < idx.size(); ++i) f << (i ? "," : "") << fmt(row[idx[i]]);
    f << "\n";
  }
  std::cout << "rows " << table.rows.size() << "\nwrote " << a.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar vehicle GNC workbench"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate an excitation mission and write its log");
  s->add_option("--config", sim.config, "Config file (defaults otherwise)");
  s->add_option("--duration", sim.duration, "Seconds to simulate")->required();
  s->add_option("--channels", sim.channels, "Excited channels, e.g. x,psi");
  s->add_option("--seed", sim.seed, "Overrides the config seed");
  s->add_option("--out", sim.out, "Log file to write")->required();

  IdentifyArgs id;
  auto* i = app.add_subcommand("identify", "Fit dl, dc and T to a mission log");
  i->add_option("--log", id.log)->required();
  i->add_option("--mass", id.mass, "Known mass (kg)");
  i->add_option("--inertia", id.inertia, "Known yaw inertia");
  i->add_option("--config", id.config, "Take mass and inertia from a config");
  i->add_option("--init", id.init, "Params file with the initial guess");
  i->add_option("--out-params", id.out_params)->required();
  i->add_option("--out-noise", id.out_noise, "Also estimate Q and R");
  i->add_flag("--plain", id.plain, "Plain least squares instead of Huber");

  EstimateCovArgs ec;
  auto* e = app.add_subcommand("estimate-cov", "Estimate sensor and model covariances");
  e->add_option("--log", ec.log)->required();
  e->add_option("--params", ec.params)->required();
  e->add_option("--out", ec.out)->required();
  e->add_option("--window", ec.window, "Smoothing window without ground truth");

  TuneArgs tu;
  auto* t = app.add_subcommand("tune", "Tune PD gains on a reference trajectory");
  t->add_option("--params", tu.params)->required();
  t->add_option("--trajectory", tu.trajectory)->required();
  t->add_option("--out", tu.out)->required();
  t->add_option("--grid", tu.grid);
  t->add_option("--refinements", tu.refinements);
  t->add_option("--dt", tu.dt);

  RunArgs ru;
  auto* r = app.add_subcommand("run", "Run the closed loop: teach, repeat or idle");
  r->add_option("--config", ru.config);
  r->add_option("--mode", ru.mode)->check(CLI::IsMember({"teach", "repeat", "idle"}));
  r->add_option("--script", ru.script, "Teach from a command script");
  r->add_option("--save", ru.save, "Name for the taught trajectory");
  r->add_option("--trajectory", ru.trajectory, "Trajectory to repeat");
  r->add_option("--laps", ru.laps, "Repeat laps; 0 loops until --duration");
  r->add_option("--duration", ru.duration, "Stop after this many simulated seconds");
  r->add_option("--name", ru.name, "Run name under data_dir/runs");
  r->add_option("--out-dir", ru.out_dir, "Output directory for the run");
  r->add_flag("--serve", ru.serve, "Serve the wire protocol");

  ReplayArgs rp;
  auto* p = app.add_subcommand("replay", "Run the EKF over a recorded log");
  p->add_option("--log", rp.log)->required();
  p->add_option("--config", rp.config);
  p->add_option("--params", rp.params);
  p->add_option("--noise", rp.noise);
  p->add_option("--out", rp.out)->required();
  p->add_flag("--open-loop", rp.open_loop, "Predict only");

  PlotExportArgs pe;
  auto* x = app.add_subcommand("plot-export", "Convert a log, trace or trajectory to CSV");
  x->add_option("--input", pe.input)->required();
  x->add_option("--output", pe.output)->required();
  x->add_option("--columns", pe.columns, "Comma-separated subset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*i) return cmd_identify(id);
    if (*e) return cmd_estimate_cov(ec);
    if (*t) return cmd_tune(tu);
    if (*r) return cmd_run(ru);
    if (*p) return cmd_replay(rp);
    if (*x) return cmd_plot_export(pe);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const rt::PortInUse& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitPortInUse;
  } catch (const gnc::TrackingDiverged& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
