#pragma once

// Array blob format: 8-byte magic "LMTN0001", 1-byte dtype tag (1 = f32,
// 2 = u8), 4-byte little-endian rank, rank 4-byte little-endian dims, then the
// payload (little-endian IEEE-754 f32, or raw bytes for u8).

#include <cstdint>
#include <string>
#include <vector>

#include "lemon/core/tensor.hpp"

namespace lemon::data {

enum class BlobType : std::uint8_t { F32 = 1, U8 = 2 };

struct BlobHeader {
  BlobType dtype;
  std::vector<std::int64_t> shape;
  std::int64_t numel() const;
};

void write_blob(const std::string& path, const std::vector<std::int64_t>& shape,
                const float* values);
void write_blob(const std::string& path, const std::vector<std::int64_t>& shape,
                const std::uint8_t* values);

BlobHeader peek_blob(const std::string& path);
Tensor<float> read_blob_f32(const std::string& path);
std::vector<std::uint8_t> read_blob_u8(const std::string& path,
                                       std::vector<std::int64_t>* shape_out = nullptr);

}  // namespace lemon::data
