#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lemon/data/sample.hpp"

namespace lemon::data {

struct ScenarioConfig {
  std::string name;           // sample-id prefix, e.g. "grasp-stick"
  std::string object_kind;    // sphere-cap | box | cylinder | stick
  std::string attach_region;  // template region the object is placed against
  std::string category;       // proxy-radius category
  std::int64_t intent_class = 0;
  double object_scale = 0.1;  // characteristic size in meters
};

struct GenConfig {
  std::int64_t image_side = 64;
  std::int64_t object_points = 256;
  std::int64_t human_full = 162;
  std::int64_t human_sampled = 81;
  double contact_radius = 0.03;
  int curvature_k = 20;
  std::int64_t samples_per_scenario = 4;
  std::vector<ScenarioConfig> scenarios;

  void validate() const;
};

// The four scenarios used by the bundled configs (grasp-stick, sit-box,
// lift-sphere, ride-cylinder).
std::vector<ScenarioConfig> default_scenarios();

// Deterministic for a given (config, seed); all stored floats are quantized to
// f32 so a round-trip through the on-disk format is bit-exact.
std::vector<InteractionSample> generate_synthetic(const GenConfig& config, std::uint64_t seed);

// Region bookkeeping for tests: the attach region declared for a sample id.
std::string scenario_region(const GenConfig& config, const std::string& sample_id);

}  // namespace lemon::data
