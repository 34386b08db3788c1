#include "gncbench/dynamics/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gncbench {

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

double angle_diff(double to, double from) { return wrap_angle(to - from); }

namespace {
double saturate(double v, bool& clamped) {
  if (std::isnan(v)) {
    clamped = true;
    return 0.0;
  }
  if (v > 1.0 || v < -1.0) clamped = true;
  return std::clamp(v, -1.0, 1.0);
}
}  // namespace

ControlAction::ControlAction(double ux, double uy, double upsi)
{
  bool clamped = false;
  ux_ = saturate(ux, clamped);
  uy_ = saturate(uy, clamped);
  upsi_ = saturate(upsi, clamped);
  clamped_ = clamped;
}

void DynamicParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidParams("mass must be positive and finite");
  if (!(inertia > 0.0) || !std::isfinite(inertia))
    throw InvalidParams("inertia must be positive and finite");
  if (!dl.allFinite() || !dc.allFinite() || !torque_map.allFinite())
    throw InvalidParams("friction coefficients and torque map must be finite");
}

bool is_finite(const VehicleState& s) {
  return std::isfinite(s.pose.x) && std::isfinite(s.pose.y) && std::isfinite(s.pose.psi) &&
         std::isfinite(s.vel.vx) && std::isfinite(s.vel.vy) && std::isfinite(s.vel.vpsi);
}

}  // namespace gncbench
