#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lemon/core/tensor.hpp"
#include "lemon/geom/types.hpp"

namespace lemon::data {

struct ImageInput {
  std::int64_t height = 0;
  std::int64_t width = 0;
  Tensor<float> pixels;                  // (H*W, 3), values in [0,1]
  std::vector<std::uint8_t> human_mask;  // H*W, values in {0,1}
  std::vector<std::uint8_t> object_mask;

  void validate() const {
    require(height > 0 && width > 0, "image: empty");
    require(pixels.rank() == 2 && pixels.rows() == height * width && pixels.cols() == 3,
            "image: pixel tensor must be (H*W, 3)");
    require(static_cast<std::int64_t>(human_mask.size()) == height * width,
            "image: human mask size mismatch");
    require(static_cast<std::int64_t>(object_mask.size()) == height * width,
            "image: object mask size mismatch");
    for (std::int64_t i = 0; i < pixels.numel(); ++i)
      require(pixels[i] >= 0.f && pixels[i] <= 1.f, "image: pixel out of [0,1]");
    for (auto m : human_mask) require(m == 0 || m == 1, "image: human mask not binary");
    for (auto m : object_mask) require(m == 0 || m == 1, "image: object mask not binary");
  }
};

// One paired record: interaction image, object points, human vertices and the
// labels used for supervision.
struct InteractionSample {
  std::string id;
  ImageInput image;
  geom::PointSet object_points;                   // N_o
  std::vector<geom::Vec3> human_vertices_full;    // V
  std::vector<geom::Vec3> human_vertices_sampled; // V'
  geom::CurvatureField object_curvature;          // N_o
  geom::CurvatureField human_curvature;           // V'
  std::vector<std::uint8_t> contact_gt;           // V, binary
  std::vector<float> affordance_gt;               // N_o, in [0,1]
  geom::Vec3 center_gt;
  std::int64_t intent_class = 0;
  std::string object_category;

  std::int64_t object_count() const { return object_points.size(); }
  std::int64_t full_vertex_count() const {
    return static_cast<std::int64_t>(human_vertices_full.size());
  }
  std::int64_t sampled_vertex_count() const {
    return static_cast<std::int64_t>(human_vertices_sampled.size());
  }

  void validate() const {
    image.validate();
    object_points.validate();
    require(full_vertex_count() > 0, "sample: no human vertices");
    require(sampled_vertex_count() > 0, "sample: no sampled human vertices");
    require(object_curvature.size() == object_count(), "sample: object curvature length");
    require(human_curvature.size() == sampled_vertex_count(), "sample: human curvature length");
    require(static_cast<std::int64_t>(contact_gt.size()) == full_vertex_count(),
            "sample: contact label length");
    for (auto c : contact_gt) require(c == 0 || c == 1, "sample: contact label not binary");
    require(static_cast<std::int64_t>(affordance_gt.size()) == object_count(),
            "sample: affordance label length");
    for (auto a : affordance_gt)
      require(a >= 0.f && a <= 1.f, "sample: affordance label out of [0,1]");
    require(center_gt.finite(), "sample: non-finite center");
    require(intent_class >= 0, "sample: negative intent class");
    require(!object_category.empty(), "sample: missing object category");
  }
};

}  // namespace lemon::data
