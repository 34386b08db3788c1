#include "gncbench/runtime/wire.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gncbench::runtime {

using json = nlohmann::ordered_json;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::idle:
      return "idle";
    case Mode::teach:
      return "teach";
    case Mode::repeat:
      return "repeat";
  }
  return "idle";
}

namespace {

const char* action_name(TeachAction a) {
  switch (a) {
    case TeachAction::start:
      return "start";
    case TeachAction::stop:
      return "stop";
    case TeachAction::save:
      return "save";
  }
  return "start";
}

template <typename V>
json array(const V& v) {
  auto out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

struct Encoder {
  json operator()(const CommandMsg& m) const {
    json j;
    j["tag"] = "command";
    j["u"] = array(m.u);
    return j;
  }
  json operator()(const StateMsg& m) const {
    json j;
    j["tag"] = "state";
    j["t"] = m.t;
    j["pose"] = array(m.pose.vec());
    j["mu"] = array(m.mu);
    j["sigma_diag"] = array(m.sigma_diag);
    j["mode"] = mode_name(m.mode);
    j["recording"] = m.recording;
    return j;
  }
  json operator()(const TeachMsg& m) const {
    json j;
    j["tag"] = "teach";
    j["action"] = action_name(m.action);
    if (m.action == TeachAction::save) j["name"] = m.name;
    return j;
  }
  json operator()(const ModeMsg& m) const {
    json j;
    j["tag"] = "mode";
    j["mode"] = mode_name(m.mode);
    if (m.mode == Mode::repeat) j["trajectory"] = m.trajectory;
    return j;
  }
  json operator()(const AckMsg& m) const {
    json j;
    j["tag"] = "ack";
    j["code"] = m.code;
    j["text"] = m.text;
    return j;
  }
  json operator()(const ErrorMsg& m) const {
    json j;
    j["tag"] = "error";
    j["code"] = m.code;
    j["text"] = m.text;
    return j;
  }
};

[[noreturn]] void bad(const std::string& text) { throw ProtocolError("bad_message", text); }

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(std::string("field '") + key + "' must be finite");
  return d;
}

template <int N>
Eigen::Matrix<double, N, 1> vector_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array() || v.size() != static_cast<std::size_t>(N))
    bad(std::string("field '") + key + "' must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) bad(std::string("field '") + key + "' has a non-number");
    out(i) = v[i].get<double>();
    if (!std::isfinite(out(i))) bad(std::string("field '") + key + "' must be finite");
  }
  return out;
}

Mode parse_mode(const std::string& s) {
  if (s == "idle") return Mode::idle;
  if (s == "teach") return Mode::teach;
  if (s == "repeat") return Mode::repeat;
  bad("unknown mode '" + s + "'");
}

}  // namespace

std::string encode(const WireMessage& msg) { return std::visit(Encoder{}, msg).dump(); }

WireMessage decode(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw ProtocolError("bad_json", "message is not valid JSON");
  }
  if (!j.is_object()) bad("message must be a JSON object");
  const std::string tag = string_field(j, "tag");
  if (tag == "command") return CommandMsg{vector_field<3>(j, "u")};
  if (tag == "state") {
    StateMsg m;
    m.t = number_field(j, "t");
    m.pose = Pose::from_vec(vector_field<3>(j, "pose"));
    m.mu = vector_field<6>(j, "mu");
    m.sigma_diag = vector_field<6>(j, "sigma_diag");
    m.mode = parse_mode(string_field(j, "mode"));
    const json& rec = field(j, "recording");
    if (!rec.is_boolean()) bad("field 'recording' must be a boolean");
    m.recording = rec.get<bool>();
    return m;
  }
  if (tag == "teach") {
    const std::string action = string_field(j, "action");
    TeachMsg m;
    if (action == "start") {
      m.action = TeachAction::start;
    } else if (action == "stop") {
      m.action = TeachAction::stop;
    } else if (action == "save") {
      m.action = TeachAction::save;
      m.name = string_field(j, "name");
    } else {
      bad("unknown teach action '" + action + "'");
    }
    return m;
  }
  if (tag == "mode") {
    ModeMsg m;
    m.mode = parse_mode(string_field(j, "mode"));
    if (m.mode == Mode::repeat) m.trajectory = string_field(j, "trajectory");
    return m;
  }
  if (tag == "ack") return AckMsg{string_field(j, "code"), string_field(j, "text")};
  if (tag == "error") return ErrorMsg{string_field(j, "code"), string_field(j, "text")};
  throw ProtocolError("unknown_tag", "unknown tag '" + tag + "'");
}

bool valid_trajectory_name(const std::string& name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

}  // namespace gncbench::runtime
