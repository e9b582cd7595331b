#pragma once

#include "lemon/geom/types.hpp"

namespace lemon::data {

// Procedural low-poly humanoid used as the body template: a connected
// triangulated surface built from quad-ring tubes (torso, head, two arms, two
// legs) with named vertex regions (hand, hand_left, hip, back, foot,
// foot_left), a block-averaging downsample map and pelvis weights.
//
// full_vertices must be 6 + 4*k for some k >= 12; every ring holds 4 vertices
// and 6 cap/tip vertices close the tubes.
geom::TemplateMesh build_humanoid_template(std::int64_t full_vertices,
                                           std::int64_t sampled_vertices);

}  // namespace lemon::data
