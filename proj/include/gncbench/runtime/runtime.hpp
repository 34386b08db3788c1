#pragma once

#include "gncbench/ekf/ekf.hpp"
#include "gncbench/gnc/closed_loop.hpp"
#include "gncbench/gnc/teach_repeat.hpp"
#include "gncbench/runtime/config.hpp"
#include "gncbench/runtime/queue.hpp"
#include "gncbench/runtime/wire.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace gncbench::runtime {

/// Item passed from the network endpoint to the tick loop.
struct InboundEvent {
  enum class Kind { message, connected, disconnected };
  Kind kind = Kind::message;
  WireMessage msg;
};

class MissingTrajectory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path of a named trajectory under the data directory.
std::filesystem::path trajectory_path(const std::filesystem::path& data_dir,
                                      const std::string& name);

/// The deterministic tick loop. Owns the vehicle, filter, controller and
/// recordings; talks to the outside only through the two queues. Time is
/// tick * dt.
class Runtime {
 public:
  explicit Runtime(const WorkbenchConfig& cfg, std::size_t queue_capacity = 256);

  BoundedQueue<InboundEvent>& inbound() { return inbound_; }
  BoundedQueue<WireMessage>& outbound() { return outbound_; }

  /// Enters teach mode with a recording running, driven by `script` (one
  /// control per tick) instead of wire commands until the script is used up.
  void start_scripted_teach(std::vector<gnc::ControlSample> script);
  /// Enters repeat mode on the named trajectory. Throws MissingTrajectory.
  void start_repeat(const std::string& name, const gnc::RepeatOptions& opts);
  /// Stops the recording and writes it. Returns the path. Throws on IO
  /// failure, bad names or an empty recording.
  std::filesystem::path save_recording(const std::string& name);

  /// One control tick: handle inbound messages, choose u for the mode,
  /// record, advance the vehicle, and broadcast state on the decimated rate.
  void tick();

  double time() const { return vehicle_.time(); }
  long tick_index() const { return vehicle_.tick_index(); }
  Mode mode() const { return mode_; }
  bool recording() const { return recording_; }
  bool script_active() const { return script_pos_ < script_.size(); }
  /// True once a repeat with a finite lap count has completed.
  bool repeat_finished() const { return repeat_done_; }
  int clients() const { return clients_; }
  /// Set when a repeat aborted.
  const std::optional<std::string>& fault() const { return fault_; }

  const gnc::SimVehicle& vehicle() const { return vehicle_; }
  const MissionLog& log() const { return log_; }
  const std::vector<ekf::FilterStep>& trace() const { return trace_; }
  const std::vector<gnc::RepeatStep>& repeat_steps() const { return repeat_steps_; }
  const gnc::ReferenceTrajectory& recorded() const { return recorded_; }
  const WorkbenchConfig& config() const { return cfg_; }

  /// Filter initial belief used by the vehicle; replaying the log through
  /// ekf::run_filter from it reproduces trace().
  static ekf::EkfState initial_belief();

 private:
  void handle(const WireMessage& msg);
  void reply(WireMessage msg) { outbound_.push(std::move(msg)); }
  void enter_mode(Mode m);
  ControlAction choose_control();
  StateMsg state_message() const;

  WorkbenchConfig cfg_;
  BoundedQueue<InboundEvent> inbound_;
  BoundedQueue<WireMessage> outbound_;
  gnc::SimVehicle vehicle_;
  Mode mode_ = Mode::idle;
  bool recording_ = false;
  gnc::ReferenceTrajectory recorded_;
  Vec3 held_ = Vec3::Zero();
  double held_since_ = -1e300;
  std::vector<gnc::ControlSample> script_;
  std::size_t script_pos_ = 0;
  std::unique_ptr<gnc::Repeater> repeater_;
  bool repeat_done_ = false;
  std::optional<std::string> fault_;
  int clients_ = 0;
  long broadcast_every_ = 5;
  MissionLog log_;
  std::vector<ekf::FilterStep> trace_;
  std::vector<gnc::RepeatStep> repeat_steps_;
};

struct LoopLimits {
  /// Stop after this much simulated time; 0 runs until another limit hits.
  double duration = 0.0;
  bool stop_after_script = false;
  bool stop_after_repeat = false;
  /// Set from another thread (signal handler) to stop.
  const std::atomic<bool>* stop = nullptr;
};

/// Ticks `rt` until a limit is reached. Paced to wall-clock time while a
/// client is attached, otherwise as fast as possible.
void run_loop(Runtime& rt, const LoopLimits& limits);

}  // namespace gncbench::runtime
