#include "lemon/data/tensor_blob.hpp"

#include <cstring>
#include <fstream>

#include "lemon/util/errors.hpp"

namespace lemon::data {

namespace {

constexpr char kMagic[8] = {'L', 'M', 'T', 'N', '0', '0', '0', '1'};

void write_header(std::ofstream& out, BlobType dtype, const std::vector<std::int64_t>& shape) {
  out.write(kMagic, 8);
  const std::uint8_t tag = static_cast<std::uint8_t>(dtype);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  const std::uint32_t rank = static_cast<std::uint32_t>(shape.size());
  out.write(reinterpret_cast<const char*>(&rank), 4);
  for (auto d : shape) {
    require(d >= 0, "blob dimension must be nonnegative");
    const std::uint32_t dim = static_cast<std::uint32_t>(d);
    out.write(reinterpret_cast<const char*>(&dim), 4);
  }
}

BlobHeader read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad blob magic in " + path);
  std::uint8_t tag = 0;
  in.read(reinterpret_cast<char*>(&tag), 1);
  std::uint32_t rank = 0;
  in.read(reinterpret_cast<char*>(&rank), 4);
  if (!in || rank > 8) throw IoError("corrupt blob header in " + path);
  BlobHeader h;
  if (tag != 1 && tag != 2) throw IoError("unknown blob dtype tag in " + path);
  h.dtype = static_cast<BlobType>(tag);
  h.shape.resize(rank);
  for (auto& d : h.shape) {
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    d = dim;
  }
  if (!in) throw IoError("truncated blob header in " + path);
  return h;
}

}  // namespace

std::int64_t BlobHeader::numel() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void write_blob(const std::string& path, const std::vector<std::int64_t>& shape,
                const float* values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open blob for writing: " + path);
  write_header(out, BlobType::F32, shape);
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  out.write(reinterpret_cast<const char*>(values),
            static_cast<std::streamsize>(n * sizeof(float)));
  if (!out) throw IoError("short write to blob: " + path);
}

void write_blob(const std::string& path, const std::vector<std::int64_t>& shape,
                const std::uint8_t* values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open blob for writing: " + path);
  write_header(out, BlobType::U8, shape);
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  out.write(reinterpret_cast<const char*>(values), static_cast<std::streamsize>(n));
  if (!out) throw IoError("short write to blob: " + path);
}

BlobHeader peek_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob: " + path);
  return read_header(in, path);
}

Tensor<float> read_blob_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob: " + path);
  const BlobHeader h = read_header(in, path);
  if (h.dtype != BlobType::F32) throw IoError("blob is not f32: " + path);
  const std::int64_t n = h.numel();
  std::vector<float> values(static_cast<size_t>(n));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in)
    throw IoError("truncated blob " + path + ": expected " +
                  std::to_string(n * sizeof(float)) + " payload bytes");
  return Tensor<float>::from(h.shape, std::move(values));
}

std::vector<std::uint8_t> read_blob_u8(const std::string& path,
                                       std::vector<std::int64_t>* shape_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob: " + path);
  const BlobHeader h = read_header(in, path);
  if (h.dtype != BlobType::U8) throw IoError("blob is not u8: " + path);
  const std::int64_t n = h.numel();
  std::vector<std::uint8_t> values(static_cast<size_t>(n));
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n));
  if (!in)
    throw IoError("truncated blob " + path + ": expected " + std::to_string(n) +
                  " payload bytes");
  if (shape_out) *shape_out = h.shape;
  return values;
}

}  // namespace lemon::data
