#include "lemon/data/radius_table.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lemon/util/errors.hpp"

namespace lemon::data {

double ProxyRadiusTable::radius_for(const std::string& category) const {
  const auto it = radii.find(category);
  if (it == radii.end()) {
    std::ostringstream msg;
    msg << "unknown object category '" << category << "'; known categories:";
    for (const auto& [name, r] : radii) msg << ' ' << name;
    throw ValidationError(msg.str());
  }
  return it->second;
}

const ProxyRadiusTable& builtin_radius_table() {
  static const ProxyRadiusTable table{{
      {"Backpack", 0.265},    {"Bottle", 0.140},   {"Mug", 0.094},
      {"Baseballbat", 0.325}, {"Suitcase", 0.332}, {"Vase", 0.197},
      {"Skateboard", 0.375},  {"Bicycle", 0.675},  {"Bowl", 0.132},
      {"Tennisracket", 0.298}, {"Scissors", 0.179}, {"Chair", 0.455},
      {"Surfboard", 0.687},   {"Keyboard", 0.217}, {"Knife", 0.173},
      {"Motorcycle", 0.710},  {"Earphone", 0.132}, {"Bag", 0.192},
      {"Umbrella", 0.372},    {"Guitar", 0.394},   {"Bed", 1.154},
  }};
  return table;
}

void write_radius_table(const std::string& path, const ProxyRadiusTable& table) {
  nlohmann::json j;
  for (const auto& [name, r] : table.radii) j[name] = r;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write radius table: " + path);
  out << j.dump(2) << '\n';
}

ProxyRadiusTable read_radius_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read radius table: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad radius table json in " + path + ": " + e.what());
  }
  ProxyRadiusTable table;
  for (const auto& [name, val] : j.items()) table.radii[name] = val.get<double>();
  return table;
}

}  // namespace lemon::data
