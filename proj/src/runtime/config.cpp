#include "gncbench/runtime/config.hpp"

#include "gncbench/dynamics/params_io.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

namespace gncbench::runtime {

namespace {

const std::set<std::string> kKeys = {
    "m",     "inertia", "dl",   "dc",   "T",         "alpha",        "beta",
    "gamma", "Q",       "R",    "dt",   "seed",      "port",         "data_dir",
    "deadman_s",        "broadcast_hz", "abort_cross_track",         "teach_source"};

double number(const nlohmann::ordered_json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return doc.at(key).get<double>();
}

template <int N>
Eigen::Matrix<double, N, N> matrix(const nlohmann::ordered_json& doc, const char* key,
                                   const Eigen::Matrix<double, N, N>& fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_array() || v.size() != static_cast<std::size_t>(N * N))
    throw ConfigError(std::string("'") + key + "' must be " + std::to_string(N * N) +
                      " numbers, row-major");
  Eigen::Matrix<double, N, N> m;
  for (int i = 0; i < N * N; ++i) {
    if (!v[i].is_number()) throw ConfigError(std::string("'") + key + "' has a non-number");
    m(i / N, i % N) = v[i].get<double>();
  }
  return m;
}

template <int N>
nlohmann::ordered_json flat(const Eigen::Matrix<double, N, N>& m) {
  auto out = nlohmann::ordered_json::array();
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) out.push_back(m(r, c));
  return out;
}

}  // namespace

void WorkbenchConfig::validate() const {
  try {
    params.validate();
    noise.validate();
    gains.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(dt > 0.0 && dt <= 0.1)) throw ConfigError("'dt' must be in (0, 0.1]");
  if (port < 0 || port > 65535) throw ConfigError("'port' must be in [0, 65535]");
  if (!(deadman_s > 0.0)) throw ConfigError("'deadman_s' must be positive");
  if (!(broadcast_hz > 0.0)) throw ConfigError("'broadcast_hz' must be positive");
  if (!(abort_cross_track > 0.0)) throw ConfigError("'abort_cross_track' must be positive");
  if (teach_source != "estimate" && teach_source != "truth")
    throw ConfigError("'teach_source' must be \"estimate\" or \"truth\"");
}

DynamicParams reference_vehicle() {
  DynamicParams p;
  p.mass = 1.47;
  p.inertia = 810.44;
  p.dl = Vec3(-7.0, -7.0, -500.553);
  p.dc = Vec3(-3.5, -3.5, -250.0);
  p.torque_map = Vec3(1.0, 1.0, 29.99).asDiagonal();
  return p;
}

WorkbenchConfig default_config() {
  WorkbenchConfig cfg;
  cfg.params = reference_vehicle();
  cfg.noise.q_meas = Vec3(2.5e-5, 2.5e-5, 1e-6).asDiagonal();
  Vec6 r;
  r << 1e-6, 1e-6, 1e-8, 1e-3, 1e-3, 1e-5;
  cfg.noise.r_model = r.asDiagonal();
  return cfg;
}

WorkbenchConfig config_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : doc.items())
    if (!kKeys.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");

  WorkbenchConfig cfg = default_config();
  const bool any_param = doc.contains("m") || doc.contains("inertia") || doc.contains("dl") ||
                         doc.contains("dc") || doc.contains("T");
  if (any_param) {
    auto merged = params_to_json(cfg.params);
    for (const char* key : {"m", "inertia", "dl", "dc", "T"})
      if (doc.contains(key)) merged[key] = doc.at(key);
    try {
      cfg.params = params_from_json(merged);
    } catch (const InvalidParams& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.gains.alpha = number(doc, "alpha", cfg.gains.alpha);
  cfg.gains.beta = number(doc, "beta", cfg.gains.beta);
  cfg.gains.gamma = number(doc, "gamma", cfg.gains.gamma);
  cfg.noise.q_meas = matrix<3>(doc, "Q", cfg.noise.q_meas);
  cfg.noise.r_model = matrix<6>(doc, "R", cfg.noise.r_model);
  cfg.dt = number(doc, "dt", cfg.dt);
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("port")) {
    if (!doc.at("port").is_number_integer()) throw ConfigError("'port' must be an integer");
    cfg.port = doc.at("port").get<int>();
  }
  if (doc.contains("data_dir")) {
    if (!doc.at("data_dir").is_string()) throw ConfigError("'data_dir' must be a string");
    cfg.data_dir = doc.at("data_dir").get<std::string>();
  }
  cfg.deadman_s = number(doc, "deadman_s", cfg.deadman_s);
  cfg.broadcast_hz = number(doc, "broadcast_hz", cfg.broadcast_hz);
  cfg.abort_cross_track = number(doc, "abort_cross_track", cfg.abort_cross_track);
  if (doc.contains("teach_source")) {
    if (!doc.at("teach_source").is_string()) throw ConfigError("'teach_source' must be a string");
    cfg.teach_source = doc.at("teach_source").get<std::string>();
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const WorkbenchConfig& cfg) {
  nlohmann::ordered_json doc = params_to_json(cfg.params);
  doc["alpha"] = cfg.gains.alpha;
  doc["beta"] = cfg.gains.beta;
  doc["gamma"] = cfg.gains.gamma;
  doc["Q"] = flat<3>(cfg.noise.q_meas);
  doc["R"] = flat<6>(cfg.noise.r_model);
  doc["dt"] = cfg.dt;
  doc["seed"] = cfg.seed;
  doc["port"] = cfg.port;
  doc["data_dir"] = cfg.data_dir.string();
  doc["deadman_s"] = cfg.deadman_s;
  doc["broadcast_hz"] = cfg.broadcast_hz;
  doc["abort_cross_track"] = cfg.abort_cross_track;
  doc["teach_source"] = cfg.teach_source;
  return doc;
}

void apply_env_overrides(WorkbenchConfig& cfg) {
  if (const char* port = std::getenv("GNCBENCH_PORT"); port && *port) {
    char* end = nullptr;
    const long v = std::strtol(port, &end, 10);
    if (*end != '\0' || v < 0 || v > 65535)
      throw ConfigError(std::string("GNCBENCH_PORT is not a port number: ") + port);
    cfg.port = static_cast<int>(v);
  }
  if (const char* dir = std::getenv("GNCBENCH_DATA_DIR"); dir && *dir) cfg.data_dir = dir;
}

WorkbenchConfig load_config(const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  try {
    doc = load_json(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  WorkbenchConfig cfg = config_from_json(doc);
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

}  // namespace gncbench::runtime
