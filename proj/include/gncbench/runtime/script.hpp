#pragma once

#include "gncbench/gnc/teach_repeat.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace gncbench::runtime {

struct ScriptLine {
  double t = 0.0;
  Vec3 u = Vec3::Zero();  // as written, before saturation
};

/// Command script: one "t ux uy upsi" line per change, '#' comments and blank
/// lines ignored. Times start at >= 0 and strictly increase. Throws
/// FormatError with the line number.
std::vector<ScriptLine> parse_script(std::istream& in);
std::vector<ScriptLine> load_script(const std::filesystem::path& path);

/// Zero-order hold onto the tick grid k * dt for k * dt < t_last: each tick
/// takes the latest line at or before it, zero before the first line. The
/// last line marks the end of the script.
std::vector<gnc::ControlSample> expand_script(const std::vector<ScriptLine>& script, double dt);

}  // namespace gncbench::runtime
