#include <cstdint>
#include <cstring>
#include <fstream>

#include "lemon/geom/ops.hpp"

namespace lemon::geom {

namespace {
constexpr char kMagic[8] = {'L', 'M', 'C', 'V', '0', '0', '0', '1'};
}

void write_curvature_cache(const std::string& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open curvature cache for writing: " + path);
  out.write(kMagic, 8);
  const std::uint32_t n = static_cast<std::uint32_t>(values.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw IoError("short write to curvature cache: " + path);
}

std::vector<float> read_curvature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open curvature cache: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("bad curvature cache magic in " + path);
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (!in) throw IoError("truncated curvature cache header in " + path);
  std::vector<float> values(n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in)
    throw IoError("truncated curvature cache in " + path + ": expected " +
                  std::to_string(n * sizeof(float)) + " value bytes");
  return values;
}

}  // namespace lemon::geom
