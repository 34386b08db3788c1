#include "gncbench/dynamics/params_io.hpp"

#include <fstream>

namespace gncbench {

namespace {

std::vector<double> read_array(const nlohmann::ordered_json& doc, const char* key,
                               std::size_t size) {
  if (!doc.contains(key)) throw InvalidParams(std::string("missing key '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_array() || v.size() != size)
    throw InvalidParams(std::string("key '") + key + "' must be an array of " +
                        std::to_string(size) + " numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw InvalidParams(std::string("key '") + key + "' has a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

double read_number(const nlohmann::ordered_json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidParams(std::string("missing key '") + key + "'");
  if (!doc.at(key).is_number()) throw InvalidParams(std::string("key '") + key + "' must be a number");
  return doc.at(key).get<double>();
}

}  // namespace

nlohmann::ordered_json params_to_json(const DynamicParams& params) {
  nlohmann::ordered_json doc;
  doc["m"] = params.mass;
  doc["inertia"] = params.inertia;
  doc["dl"] = {params.dl.x(), params.dl.y(), params.dl.z()};
  doc["dc"] = {params.dc.x(), params.dc.y(), params.dc.z()};
  auto t = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.push_back(params.torque_map(r, c));
  doc["T"] = t;
  return doc;
}

DynamicParams params_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw InvalidParams("parameter document must be an object");
  DynamicParams p;
  p.mass = read_number(doc, "m");
  p.inertia = read_number(doc, "inertia");
  const auto dl = read_array(doc, "dl", 3);
  const auto dc = read_array(doc, "dc", 3);
  const auto t = read_array(doc, "T", 9);
  p.dl = Vec3(dl[0], dl[1], dl[2]);
  p.dc = Vec3(dc[0], dc[1], dc[2]);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.torque_map(r, c) = t[3 * r + c];
  p.validate();
  return p;
}

void save_params(const std::filesystem::path& path, const DynamicParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << params_to_json(params).dump(2) << '\n';
}

DynamicParams load_params(const std::filesystem::path& path) { return params_from_json(load_json(path)); }

nlohmann::ordered_json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace gncbench
