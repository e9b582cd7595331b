#include "lemon/data/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "lemon/data/radius_table.hpp"
#include "lemon/data/sample_io.hpp"
#include "lemon/data/split.hpp"
#include "lemon/util/errors.hpp"

namespace fs = std::filesystem;

namespace lemon::data {

InteractionSample NativeImporter::import_dir(const std::string& directory) const {
  return read_sample(directory);
}

std::vector<std::string> list_sample_dirs(const std::string& root, const std::string& split) {
  const fs::path dir = fs::path(root) / split;
  if (!fs::exists(dir)) throw IoError("dataset split does not exist: " + dir.string());
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) out.push_back(entry.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

Dataset load_split(const std::string& root, const std::string& split, const Importer& importer) {
  Dataset ds;
  for (const auto& dir : list_sample_dirs(root, split))
    ds.samples.push_back(importer.import_dir(dir));
  return ds;
}

void write_dataset_root(const std::string& root, const GenConfig& config,
                        const std::array<double, 3>& ratios, std::uint64_t seed) {
  const auto samples = generate_synthetic(config, seed);
  std::vector<std::string> cats;
  cats.reserve(samples.size());
  for (const auto& s : samples) cats.push_back(s.object_category);
  const SplitIndices idx = split_dataset(cats, ratios, seed);

  fs::create_directories(root);
  const auto& table = builtin_radius_table();
  write_radius_table((fs::path(root) / "radii.json").string(), table);

  auto write_all = [&](const char* split, const std::vector<std::int64_t>& ids) {
    if (ids.empty()) return;
    for (auto i : ids) {
      const auto& s = samples[static_cast<size_t>(i)];
      const fs::path dir = fs::path(root) / split / s.id;
      write_sample(s, dir.string(), table.radius_for(s.object_category));
    }
  };
  write_all("train", idx.train);
  write_all("val", idx.val);
  write_all("test", idx.test);
}

}  // namespace lemon::data
