#pragma once

#include <string>

#include "lemon/data/radius_table.hpp"
#include "lemon/data/sample.hpp"

namespace lemon::data {

// One directory per sample: manifest.json plus one blob per array. The
// manifest records id, category, intent class, proxy radius and every blob's
// shape; readers cross-check manifest shapes against blob headers.
void write_sample(const InteractionSample& sample, const std::string& directory,
                  double proxy_radius);

InteractionSample read_sample(const std::string& directory);

// Proxy radius recorded in a sample's manifest.
double manifest_radius(const std::string& directory);

}  // namespace lemon::data
