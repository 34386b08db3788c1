#include "gncbench/runtime/script.hpp"

#include "gncbench/common/table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gncbench::runtime {

std::vector<ScriptLine> parse_script(std::istream& in) {
  std::vector<ScriptLine> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    ss.imbue(std::locale::classic());
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw FormatError("script line " + std::to_string(number) + ": not a number");
    if (v.empty()) continue;
    if (v.size() != 4)
      throw FormatError("script line " + std::to_string(number) + ": expected 't ux uy upsi'");
    for (double e : v)
      if (!std::isfinite(e))
        throw FormatError("script line " + std::to_string(number) + ": non-finite value");
    if (v[0] < 0.0 || (!out.empty() && !(v[0] > out.back().t)))
      throw FormatError("script line " + std::to_string(number) +
                        ": times must start at >= 0 and increase");
    out.push_back({v[0], Vec3(v[1], v[2], v[3])});
  }
  if (out.empty()) throw FormatError("script has no commands");
  return out;
}

std::vector<ScriptLine> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return parse_script(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<gnc::ControlSample> expand_script(const std::vector<ScriptLine>& script, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("expand_script: dt must be positive");
  std::vector<gnc::ControlSample> out;
  if (script.empty()) return out;
  const double end = script.back().t;
  std::size_t next = 0;
  Vec3 held = Vec3::Zero();
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    // Tolerance keeps lines written on the tick grid from slipping a tick.
    const double tol = 1e-9 * std::max(1.0, t);
    if (t >= end - tol) break;
    while (next < script.size() && script[next].t <= t + tol) held = script[next++].u;
    out.push_back({t, ControlAction::from_vec(held)});
  }
  return out;
}

}  // namespace gncbench::runtime
