#pragma once

namespace gncbench::sysid {

/// Huber penalty: r^2/2 for |r| <= delta, delta (|r| - delta/2) beyond.
/// Throws std::invalid_argument unless delta > 0.
double huber(double r, double delta);

/// IRLS weight psi(r)/r: 1 inside the threshold, delta/|r| outside.
double huber_weight(double r, double delta);

}  // namespace gncbench::sysid
