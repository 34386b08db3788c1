#pragma once

#include "gncbench/dynamics/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gncbench {

struct ChannelMask {
  bool x = false;
  bool y = false;
  bool psi = false;

  bool empty() const { return !x && !y && !psi; }
  /// Parses a comma-separated list of "x", "y", "psi". Throws
  /// EmptyChannelMask for an empty list and std::invalid_argument for
  /// unknown names.
  static ChannelMask parse(const std::string& text);
};

class EmptyChannelMask : public std::invalid_argument {
 public:
  EmptyChannelMask() : std::invalid_argument("excitation needs at least one channel") {}
};

struct ExcitationOptions {
  int sinusoids = 6;
  double min_frequency_hz = 0.02;
  double max_frequency_hz = 1.0;
  double sine_amplitude = 0.3;  // total over all sinusoids
  double step_amplitude = 0.7;  // pseudo-random step levels drawn in [-a, a]
  double min_hold_s = 1.0;
  double max_hold_s = 5.0;
};

/// Persistently exciting command sequence: per enabled channel a multisine of
/// incommensurate frequencies plus zero-mean pseudo-random steps, clipped to
/// [-1, 1]. Disabled channels are identically zero. Bit-identical for equal
/// arguments.
std::vector<ControlAction> excitation_signal(double duration, double dt, ChannelMask channels,
                                             std::uint64_t seed,
                                             const ExcitationOptions& options = {});

}  // namespace gncbench
