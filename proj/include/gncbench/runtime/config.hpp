#pragma once

#include "gncbench/dynamics/types.hpp"
#include "gncbench/gnc/pd_controller.hpp"
#include "gncbench/sim/noise.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace gncbench::runtime {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. One flat JSON document; parameter keys match the
/// params files written by `identify`, gain keys match `tune` output.
struct WorkbenchConfig {
  DynamicParams params;  // plant, and the filter model
  NoiseModel noise;      // sensor/process noise of the plant, and the filter's Q/R
  gnc::PdGains gains{20.0, 40.0, 40.0};
  double dt = 0.01;
  std::uint64_t seed = 1;
  int port = 8765;
  std::filesystem::path data_dir = "data";
  double deadman_s = 0.5;
  double broadcast_hz = 20.0;
  double abort_cross_track = 5.0;
  /// "estimate" or "truth": which pose a teach session records.
  std::string teach_source = "estimate";

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// The simulated reference vehicle: m 1.47, I 810.44, dl (-7, -7, -500.553),
/// dc (-3.5, -3.5, -250), T diag(1, 1, 29.99).
DynamicParams reference_vehicle();

/// Defaults plus the reference vehicle, a small sensor noise and a filter
/// model noise that keeps the filter well conditioned.
WorkbenchConfig default_config();

/// Keys not present keep their default. Unknown keys are rejected.
WorkbenchConfig config_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json config_to_json(const WorkbenchConfig& cfg);

/// GNCBENCH_PORT and GNCBENCH_DATA_DIR override the file.
void apply_env_overrides(WorkbenchConfig& cfg);

/// Reads, applies environment overrides and validates.
WorkbenchConfig load_config(const std::filesystem::path& path);

}  // namespace gncbench::runtime
