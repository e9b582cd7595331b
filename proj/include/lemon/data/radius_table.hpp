#pragma once

#include <map>
#include <string>

namespace lemon::data {

// Object proxy-sphere radii in meters, one per supported category.
struct ProxyRadiusTable {
  std::map<std::string, double> radii;

  double radius_for(const std::string& category) const;
};

// The built-in 21-category table.
const ProxyRadiusTable& builtin_radius_table();

void write_radius_table(const std::string& path, const ProxyRadiusTable& table);
ProxyRadiusTable read_radius_table(const std::string& path);

}  // namespace lemon::data
