#include "gncbench/sim/excitation.hpp"

#include "gncbench/sim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gncbench {

ChannelMask ChannelMask::parse(const std::string& text) {
  ChannelMask mask;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "x") {
      mask.x = true;
    } else if (item == "y") {
      mask.y = true;
    } else if (item == "psi") {
      mask.psi = true;
    } else {
      throw std::invalid_argument("unknown channel '" + item + "' (expected x, y, psi)");
    }
  }
  if (mask.empty()) throw EmptyChannelMask();
  return mask;
}

namespace {

// Square roots of primes keep the frequency ratios irrational.
constexpr double kIrrational[] = {1.0,          1.4142135624, 1.7320508076, 2.2360679775,
                                  2.6457513111, 3.3166247904, 3.6055512755, 4.1231056256};

std::vector<double> channel_signal(std::size_t n, double dt, Rng& rng,
                                   const ExcitationOptions& opt) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n, 0.0);

  const int count = std::max(opt.sinusoids, 5);
  const double ratio = std::pow(opt.max_frequency_hz / opt.min_frequency_hz, 1.0 / (count - 1));
  const double amp = opt.sine_amplitude / count;
  for (int k = 0; k < count; ++k) {
    const double base = opt.min_frequency_hz * std::pow(ratio, k);
    // Nudge each frequency by an irrational factor inside its log band.
    const double freq = base * (1.0 + 0.1 * (kIrrational[k % 8] - std::floor(kIrrational[k % 8])));
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    for (std::size_t i = 0; i < n; ++i)
      out[i] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) * dt + phase);
  }

  std::vector<double> steps(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    const double hold = opt.min_hold_s + (opt.max_hold_s - opt.min_hold_s) * unit(rng);
    const double level = opt.step_amplitude * (2.0 * unit(rng) - 1.0);
    const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(hold / dt)));
    for (std::size_t j = i; j < std::min(n, i + len); ++j) steps[j] = level;
    i += len;
  }
  double mean = 0.0;
  for (double s : steps) mean += s;
  mean /= static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = std::clamp(out[j] + steps[j] - mean, -1.0, 1.0);
  return out;
}

}  // namespace

std::vector<ControlAction> excitation_signal(double duration, double dt, ChannelMask channels,
                                             std::uint64_t seed, const ExcitationOptions& options) {
  if (channels.empty()) throw EmptyChannelMask();
  if (!(dt > 0.0) || !(duration > 0.0))
    throw std::invalid_argument("excitation_signal: duration and dt must be positive");
  const auto n = static_cast<std::size_t>(std::lround(duration / dt));

  std::vector<double> zero(n, 0.0);
  std::vector<double> sx = zero, sy = zero, spsi = zero;
  // Independent streams per channel so masking one channel leaves the others unchanged.
  if (channels.x) {
    Rng rng(seed * 3 + 0);
    sx = channel_signal(n, dt, rng, options);
  }
  if (channels.y) {
    Rng rng(seed * 3 + 1);
    sy = channel_signal(n, dt, rng, options);
  }
  if (channels.psi) {
    Rng rng(seed * 3 + 2);
    spsi = channel_signal(n, dt, rng, options);
  }
  std::vector<ControlAction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(sx[i], sy[i], spsi[i]);
  return out;
}

}  // namespace gncbench
