#include "gncbench/runtime/runtime.hpp"

#include "gncbench/gnc/trajectory.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace gncbench::runtime {

namespace {

gnc::VehicleSetup vehicle_setup(const WorkbenchConfig& cfg) {
  gnc::VehicleSetup s;
  s.plant = cfg.params;
  s.model = cfg.params;
  s.plant_noise = cfg.noise;
  s.filter_noise = cfg.noise;
  s.seed = cfg.seed;
  s.dt = cfg.dt;
  return s;
}

}  // namespace

std::filesystem::path trajectory_path(const std::filesystem::path& data_dir,
                                      const std::string& name) {
  return data_dir / "trajectories" / (name + ".traj");
}

ekf::EkfState Runtime::initial_belief() { return ekf::EkfState::at_rest(); }

Runtime::Runtime(const WorkbenchConfig& cfg, std::size_t queue_capacity)
    : cfg_(cfg),
      inbound_(queue_capacity),
      outbound_(queue_capacity),
      vehicle_(vehicle_setup(cfg)) {
  cfg_.validate();
  broadcast_every_ = std::max(1L, std::lround(1.0 / (cfg_.broadcast_hz * cfg_.dt)));
}

void Runtime::enter_mode(Mode m) {
  mode_ = m;
  recording_ = false;
  held_ = Vec3::Zero();
  held_since_ = -1e300;
  repeater_.reset();
  repeat_done_ = false;
  script_.clear();
  script_pos_ = 0;
}

void Runtime::start_scripted_teach(std::vector<gnc::ControlSample> script) {
  enter_mode(Mode::teach);
  recording_ = true;
  recorded_.samples.clear();
  script_ = std::move(script);
  script_pos_ = 0;
}

void Runtime::start_repeat(const std::string& name, const gnc::RepeatOptions& opts) {
  if (!valid_trajectory_name(name)) throw MissingTrajectory("invalid trajectory name '" + name + "'");
  const auto path = trajectory_path(cfg_.data_dir, name);
  if (!std::filesystem::exists(path))
    throw MissingTrajectory("no trajectory named '" + name + "' in " + cfg_.data_dir.string());
  gnc::ReferenceTrajectory traj = gnc::load_trajectory(path);
  gnc::RepeatOptions o = opts;
  o.abort_cross_track = cfg_.abort_cross_track;
  enter_mode(Mode::repeat);
  repeater_ = std::make_unique<gnc::Repeater>(std::move(traj), cfg_.gains, o, time());
}

std::filesystem::path Runtime::save_recording(const std::string& name) {
  if (!valid_trajectory_name(name))
    throw std::invalid_argument("trajectory names use 1-64 characters of A-Z a-z 0-9 _ -");
  recording_ = false;
  if (recorded_.samples.size() < 2) throw std::runtime_error("nothing recorded");
  const auto path = trajectory_path(cfg_.data_dir, name);
  std::filesystem::create_directories(path.parent_path());
  gnc::save_trajectory(path, recorded_);
  return path;
}

void Runtime::handle(const WireMessage& msg) {
  if (const auto* cmd = std::get_if<CommandMsg>(&msg)) {
    if (mode_ != Mode::teach || !recording_) {
      reply(ErrorMsg{"not_recording", "commands are accepted only during a teach recording"});
      return;
    }
    if (script_active()) {
      reply(ErrorMsg{"scripted", "a command script is driving this recording"});
      return;
    }
    const ControlAction u = ControlAction::from_vec(cmd->u);
    held_ = u.vec();
    held_since_ = time();
    if (u.clamped()) {
      reply(AckMsg{"clamped", "command saturated to [-1, 1]"});
    } else {
      reply(AckMsg{"ok", "command"});
    }
    return;
  }
  if (const auto* teach = std::get_if<TeachMsg>(&msg)) {
    if (mode_ != Mode::teach) {
      reply(ErrorMsg{"wrong_mode", "teach control requires teach mode"});
      return;
    }
    switch (teach->action) {
      case TeachAction::start:
        recording_ = true;
        recorded_.samples.clear();
        held_ = Vec3::Zero();
        held_since_ = -1e300;
        reply(AckMsg{"ok", "recording"});
        return;
      case TeachAction::stop:
        if (!recording_) {
          reply(ErrorMsg{"not_recording", "no recording in progress"});
          return;
        }
        recording_ = false;
        held_ = Vec3::Zero();
        reply(AckMsg{"ok", "stopped with " + std::to_string(recorded_.samples.size()) + " samples"});
        return;
      case TeachAction::save:
        try {
          const auto path = save_recording(teach->name);
          reply(AckMsg{"ok", "saved " + path.string()});
        } catch (const std::invalid_argument& e) {
          reply(ErrorMsg{"bad_name", e.what()});
        } catch (const std::exception& e) {
          reply(ErrorMsg{"save_failed", e.what()});
        }
        return;
    }
  }
  if (const auto* mode = std::get_if<ModeMsg>(&msg)) {
    if (mode->mode == Mode::repeat) {
      try {
        gnc::RepeatOptions opts;
        opts.loop = true;
        opts.laps = 0;
        start_repeat(mode->trajectory, opts);
        reply(AckMsg{"ok", "repeat " + mode->trajectory});
      } catch (const MissingTrajectory& e) {
        reply(ErrorMsg{"missing_trajectory", e.what()});
      } catch (const std::exception& e) {
        reply(ErrorMsg{"bad_trajectory", e.what()});
      }
      return;
    }
    enter_mode(mode->mode);
    reply(AckMsg{"ok", mode_name(mode->mode)});
    return;
  }
  reply(ErrorMsg{"unexpected_message", "servers accept command, teach and mode messages"});
}

ControlAction Runtime::choose_control() {
  switch (mode_) {
    case Mode::idle:
      return {};
    case Mode::teach:
      if (script_active()) return script_[script_pos_++].u;
      if (recording_ && time() - held_since_ <= cfg_.deadman_s + 1e-9)
        return ControlAction::from_vec(held_);
      return {};
    case Mode::repeat: {
      if (!repeater_ || repeat_done_) return {};
      if (repeater_->finished(time())) {
        repeat_done_ = true;
        return {};
      }
      try {
        gnc::RepeatStep st = repeater_->command(vehicle_);
        const ControlAction u = st.u;
        repeat_steps_.push_back(std::move(st));
        return u;
      } catch (const gnc::TrackingDiverged& e) {
        fault_ = e.what();
        reply(ErrorMsg{"tracking_diverged", e.what()});
        enter_mode(Mode::idle);
        return {};
      }
    }
  }
  return {};
}

StateMsg Runtime::state_message() const {
  StateMsg m;
  m.t = time();
  m.pose = vehicle_.estimated_pose();
  m.mu = vehicle_.filter().mu;
  m.sigma_diag = vehicle_.filter().sigma.diagonal();
  m.mode = mode_;
  m.recording = recording_;
  return m;
}

void Runtime::tick() {
  for (InboundEvent& ev : inbound_.drain()) {
    switch (ev.kind) {
      case InboundEvent::Kind::connected:
        ++clients_;
        break;
      case InboundEvent::Kind::disconnected:
        clients_ = std::max(0, clients_ - 1);
        break;
      case InboundEvent::Kind::message:
        handle(ev.msg);
        break;
    }
  }

  const ControlAction u = choose_control();
  const double t = time();
  if (recording_) {
    gnc::TrajectorySample s;
    s.t = t;
    if (cfg_.teach_source == "truth") {
      s.pose = vehicle_.truth().pose;
      s.vel = vehicle_.truth().vel;
    } else {
      s.pose = vehicle_.estimated_pose();
      s.vel = vehicle_.filter().velocity();
    }
    recorded_.samples.push_back(s);
  }
  const Pose pose = vehicle_.estimated_pose();
  log_.records.push_back(vehicle_.tick(u));
  trace_.push_back({t, vehicle_.filter(), pose, vehicle_.last_innovation()});

  if (vehicle_.tick_index() % broadcast_every_ == 0) reply(state_message());
}

void run_loop(Runtime& rt, const LoopLimits& limits) {
  using clock = std::chrono::steady_clock;
  const long max_ticks =
      limits.duration > 0.0 ? std::lround(limits.duration / rt.config().dt) : -1;
  bool paced = false;
  clock::time_point anchor;
  long anchor_tick = 0;
  for (long n = 0; max_ticks < 0 || n < max_ticks; ++n) {
    if (limits.stop && limits.stop->load()) break;
    if (limits.stop_after_script && !rt.script_active() && rt.recording()) break;
    if (limits.stop_after_repeat && (rt.repeat_finished() || rt.fault())) break;
    rt.tick();
    const bool attached = rt.clients() > 0;
    if (attached != paced) {
      paced = attached;
      anchor = clock::now();
      anchor_tick = rt.tick_index();
    }
    if (paced) {
      const auto due = anchor + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(
                                    static_cast<double>(rt.tick_index() - anchor_tick) * rt.config().dt));
      std::this_thread::sleep_until(due);
    }
  }
}

}  // namespace gncbench::runtime
