#pragma once

#include "gncbench/dynamics/types.hpp"

#include <stdexcept>
#include <string>
#include <variant>

namespace gncbench::runtime {

enum class Mode { idle, teach, repeat };
const char* mode_name(Mode m);

/// Teleop command, client to server.
struct CommandMsg {
  Vec3 u = Vec3::Zero();
};

/// Periodic vehicle state, server to client.
struct StateMsg {
  double t = 0.0;
  Pose pose;
  Vec6 mu = Vec6::Zero();
  Vec6 sigma_diag = Vec6::Zero();
  Mode mode = Mode::idle;
  bool recording = false;
};

enum class TeachAction { start, stop, save };

/// Recording control, client to server. `name` is used by save only.
struct TeachMsg {
  TeachAction action = TeachAction::start;
  std::string name;
};

/// Mode change, client to server. `trajectory` names the path for repeat.
struct ModeMsg {
  Mode mode = Mode::idle;
  std::string trajectory;
};

/// Reply to an accepted client message.
struct AckMsg {
  std::string code = "ok";
  std::string text;
};

/// Reply to a rejected client message, or an asynchronous fault.
struct ErrorMsg {
  std::string code;
  std::string text;
};

using WireMessage = std::variant<CommandMsg, StateMsg, TeachMsg, ModeMsg, AckMsg, ErrorMsg>;

/// Decoding failure; `code()` is the wire error code.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// One JSON object per message, "tag" first, fields in documented order.
std::string encode(const WireMessage& msg);
WireMessage decode(const std::string& text);

/// Trajectory names: 1-64 characters of [A-Za-z0-9_-].
bool valid_trajectory_name(const std::string& name);

}  // namespace gncbench::runtime
