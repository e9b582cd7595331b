#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "lemon/data/generator.hpp"
#include "lemon/data/sample.hpp"

namespace lemon::data {

// Adapter seam for external data layouts: anything that turns one sample
// directory into an InteractionSample can back a Dataset.
struct Importer {
  virtual ~Importer() = default;
  virtual InteractionSample import_dir(const std::string& directory) const = 0;
};

struct NativeImporter final : Importer {
  InteractionSample import_dir(const std::string& directory) const override;
};

struct Dataset {
  std::vector<InteractionSample> samples;

  std::int64_t size() const { return static_cast<std::int64_t>(samples.size()); }
};

// Sorted sample directories under root/<split>.
std::vector<std::string> list_sample_dirs(const std::string& root, const std::string& split);

Dataset load_split(const std::string& root, const std::string& split,
                   const Importer& importer = NativeImporter{});

// Generates, splits and writes a dataset root:
// root/<split>/<sample_id>/{manifest.json, blobs} plus root/radii.json.
void write_dataset_root(const std::string& root, const GenConfig& config,
                        const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace lemon::data
