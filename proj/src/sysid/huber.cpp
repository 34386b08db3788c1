#include "gncbench/sysid/huber.hpp"

#include <cmath>
#include <stdexcept>

namespace gncbench::sysid {

double huber(double r, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be positive");
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_weight(double r, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber_weight: delta must be positive");
  const double a = std::abs(r);
  return a <= delta ? 1.0 : delta / a;
}

}  // namespace gncbench::sysid
