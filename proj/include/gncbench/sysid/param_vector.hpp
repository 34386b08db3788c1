#pragma once

#include "gncbench/dynamics/types.hpp"

#include <string>

namespace gncbench::sysid {

inline constexpr int kParamCount = 15;
using ParamArray = Eigen::Matrix<double, kParamCount, 1>;

/// Offsets into the packed vector: dl (3), dc (3), T row-major (9).
inline constexpr int kDl = 0;
inline constexpr int kDc = 3;
inline constexpr int kTorque = 6;

/// Index of torque_map(row, col) in the packed vector.
constexpr int torque_index(int row, int col) { return kTorque + 3 * row + col; }

/// Mass and yaw inertia, measured beforehand and held fixed during a fit.
struct KnownInertia {
  double mass = 1.0;
  double inertia = 1.0;
};

/// The fitted unknowns p = (dl, dc, T).
class ParamVector {
 public:
  ParamVector() : values_(ParamArray::Zero()) {}
  explicit ParamVector(const ParamArray& values) : values_(values) {}

  static ParamVector pack(const DynamicParams& params);
  DynamicParams unpack(const KnownInertia& known) const;

  const ParamArray& values() const { return values_; }
  ParamArray& values() { return values_; }
  double operator[](int i) const { return values_(i); }

  /// "dl_x", "dc_psi", "T01", ...
  static std::string name(int index);

 private:
  ParamArray values_;
};

}  // namespace gncbench::sysid
