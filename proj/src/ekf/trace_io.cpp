#include "gncbench/ekf/trace_io.hpp"

namespace gncbench::ekf {

Table trace_to_table(const MissionLog& log, const std::vector<FilterStep>& trace) {
  if (trace.size() != log.size()) throw FormatError("trace and log lengths differ");
  Table table = log_to_table(log);
  static const char* kState[] = {"vx", "vy", "vpsi", "ax", "ay", "apsi"};
  for (const char* s : kState) table.columns.push_back(std::string("mu_") + s);
  for (const char* s : kState) table.columns.push_back(std::string("sig_") + s);
  for (const char* s : {"est_x", "est_y", "est_psi"}) table.columns.emplace_back(s);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    auto& row = table.rows[k];
    const auto& f = trace[k];
    for (int i = 0; i < 6; ++i) row.push_back(f.state.mu(i));
    for (int i = 0; i < 6; ++i) row.push_back(f.state.sigma(i, i));
    row.insert(row.end(), {f.pose.x, f.pose.y, f.pose.psi});
  }
  return table;
}

}  // namespace gncbench::ekf
