#pragma once

#include "gncbench/common/table.hpp"
#include "gncbench/ekf/ekf.hpp"

namespace gncbench::ekf {

/// Mission log columns followed by mu_* (6), sig_* (diagonal of Sigma, 6) and
/// the dead-reckoned pose est_x est_y est_psi. `trace` must align with `log`.
Table trace_to_table(const MissionLog& log, const std::vector<FilterStep>& trace);

}  // namespace gncbench::ekf
