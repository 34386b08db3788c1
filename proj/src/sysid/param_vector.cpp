#include "gncbench/sysid/param_vector.hpp"

#include <stdexcept>

namespace gncbench::sysid {

ParamVector ParamVector::pack(const DynamicParams& params) {
  ParamArray v;
  v.segment<3>(kDl) = params.dl;
  v.segment<3>(kDc) = params.dc;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v(torque_index(r, c)) = params.torque_map(r, c);
  return ParamVector(v);
}

DynamicParams ParamVector::unpack(const KnownInertia& known) const {
  DynamicParams p;
  p.mass = known.mass;
  p.inertia = known.inertia;
  p.dl = values_.segment<3>(kDl);
  p.dc = values_.segment<3>(kDc);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.torque_map(r, c) = values_(torque_index(r, c));
  return p;
}

std::string ParamVector::name(int index) {
  static const char* kAxis[] = {"x", "y", "psi"};
  if (index < 0 || index >= kParamCount) throw std::out_of_range("ParamVector::name");
  if (index < kDc) return std::string("dl_") + kAxis[index - kDl];
  if (index < kTorque) return std::string("dc_") + kAxis[index - kDc];
  const int k = index - kTorque;
  return "T" + std::to_string(k / 3) + std::to_string(k % 3);
}

}  // namespace gncbench::sysid
