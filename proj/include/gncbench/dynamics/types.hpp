#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gncbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Shortest signed angular distance from `from` to `to`, in (-pi, pi].
double angle_diff(double to, double from);

/// World-frame pose. Heading is kept wrapped by every writer in this library.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Vec3 vec() const { return {x, y, psi}; }
  static Pose from_vec(const Vec3& v) { return {v.x(), v.y(), wrap_angle(v.z())}; }
};

/// Body-frame twist: surge, sway, yaw rate.
struct BodyVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double vpsi = 0.0;

  Vec3 vec() const { return {vx, vy, vpsi}; }
  static BodyVelocity from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Time derivative of BodyVelocity.
struct BodyAccel {
  double ax = 0.0;
  double ay = 0.0;
  double apsi = 0.0;

  Vec3 vec() const { return {ax, ay, apsi}; }
  static BodyAccel from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Actuator command, saturated component-wise to [-1, 1] on construction.
class ControlAction {
 public:
  ControlAction() = default;
  ControlAction(double ux, double uy, double upsi);

  static ControlAction from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

  double ux() const { return ux_; }
  double uy() const { return uy_; }
  double upsi() const { return upsi_; }
  Vec3 vec() const { return {ux_, uy_, upsi_}; }

  /// True when any requested component was outside [-1, 1].
  bool clamped() const { return clamped_; }

  bool operator==(const ControlAction& o) const {
    return ux_ == o.ux_ && uy_ == o.uy_ && upsi_ == o.upsi_;
  }

 private:
  double ux_ = 0.0;
  double uy_ = 0.0;
  double upsi_ = 0.0;
  bool clamped_ = false;
};

/// Rigid-body and actuator parameters of the planar vehicle.
///
/// Friction enters the damping matrix as D = diag(-dl_i - dc_i |v_i|), so
/// dissipative friction has negative dl/dc (the identified convention).
struct DynamicParams {
  double mass = 1.0;
  double inertia = 1.0;
  Vec3 dl = Vec3::Zero();
  Vec3 dc = Vec3::Zero();
  Mat3 torque_map = Mat3::Identity();

  /// Throws InvalidParams unless mass and inertia are positive and every
  /// entry is finite.
  void validate() const;
};

struct VehicleState {
  Pose pose;
  BodyVelocity vel;
};

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteState : public std::runtime_error {
 public:
  explicit NonFiniteState(const std::string& what, long index = -1)
      : std::runtime_error(what), index_(index) {}
  /// Step or record index at which the state stopped being finite, -1 if unknown.
  long index() const { return index_; }

 private:
  long index_;
};

bool is_finite(const VehicleState& s);

}  // namespace gncbench
