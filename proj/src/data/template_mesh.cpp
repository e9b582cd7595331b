#include "lemon/data/template_mesh.hpp"

#include <algorithm>
#include <cmath>

namespace lemon::data {

using geom::TemplateMesh;
using geom::Vec3;

namespace {

struct Segment {
  const char* name;
  Vec3 start, end;
  double radius;
  double weight;  // share of the ring budget
  bool tip;       // closing tip vertex after the last ring
  std::int64_t rings = 0;
  std::int64_t first_vertex = 0;  // filled during construction
};

Vec3 ring_basis_u(const Vec3& axis) {
  Vec3 seed{1, 0, 0};
  Vec3 u = seed - axis * axis.dot(seed);
  if (u.norm() < 1e-6) {
    seed = {0, 1, 0};
    u = seed - axis * axis.dot(seed);
  }
  return u.normalized();
}

}  // namespace

TemplateMesh build_humanoid_template(std::int64_t full_vertices, std::int64_t sampled_vertices) {
  require(full_vertices >= 54 && (full_vertices - 6) % 4 == 0,
          "template: full vertex count must be 6 + 4*k with k >= 12");
  require(sampled_vertices >= 1 && sampled_vertices <= full_vertices,
          "template: sampled count out of range");

  const std::int64_t ring_budget = (full_vertices - 6) / 4;

  Segment segs[] = {
      {"torso", {0, 0, 0.92}, {0, 0, 1.44}, 0.140, 8, false},
      {"head", {0, 0, 1.50}, {0, 0, 1.66}, 0.085, 3, true},
      {"arm_r", {0.17, 0, 1.40}, {0.55, 0.10, 1.06}, 0.045, 5, true},
      {"arm_l", {-0.17, 0, 1.40}, {-0.55, 0.10, 1.06}, 0.045, 5, true},
      {"leg_r", {0.09, 0, 0.88}, {0.11, 0.06, 0.04}, 0.060, 9, true},
      {"leg_l", {-0.09, 0, 0.88}, {-0.11, 0.06, 0.04}, 0.060, 9, true},
  };
  constexpr int n_segs = 6;

  // Largest-remainder ring allocation with a floor of 2 rings per segment.
  double wsum = 0;
  for (const auto& s : segs) wsum += s.weight;
  std::int64_t assigned = 0;
  double frac[n_segs];
  for (int i = 0; i < n_segs; ++i) {
    const double exact = ring_budget * segs[i].weight / wsum;
    segs[i].rings = std::max<std::int64_t>(2, static_cast<std::int64_t>(exact));
    frac[i] = exact - std::floor(exact);
    assigned += segs[i].rings;
  }
  while (assigned < ring_budget) {
    int best = 0;
    for (int i = 1; i < n_segs; ++i)
      if (frac[i] > frac[best]) best = i;
    ++segs[best].rings;
    frac[best] = -1;
    ++assigned;
  }
  while (assigned > ring_budget) {
    int best = 0;
    for (int i = 1; i < n_segs; ++i)
      if (segs[i].rings > segs[best].rings) best = i;
    --segs[best].rings;
    --assigned;
  }

  TemplateMesh mesh;
  const Vec3 pelvis_cap{0, 0, 0.84};
  mesh.vertices.push_back(pelvis_cap);
  const std::int64_t pelvis_idx = 0;

  auto add_ring = [&](const Vec3& center, const Vec3& axis, double radius) {
    const Vec3 u = ring_basis_u(axis);
    const Vec3 v = axis.cross(u);
    for (int a = 0; a < 4; ++a) {
      const double angle = (45.0 + 90.0 * a) * 3.14159265358979323846 / 180.0;
      mesh.vertices.push_back(center + (u * std::cos(angle) + v * std::sin(angle)) * radius);
    }
    return static_cast<std::int64_t>(mesh.vertices.size()) - 4;
  };
  auto ring_faces = [&](std::int64_t r0, std::int64_t r1) {
    for (int a = 0; a < 4; ++a) {
      const std::int64_t b = (a + 1) % 4;
      mesh.faces.push_back({r0 + a, r0 + b, r1 + a});
      mesh.faces.push_back({r0 + b, r1 + b, r1 + a});
    }
  };
  auto fan_to = [&](std::int64_t ring, std::int64_t apex) {
    for (int a = 0; a < 4; ++a) mesh.faces.push_back({ring + a, ring + (a + 1) % 4, apex});
  };

  std::int64_t tips[n_segs];
  for (int si = 0; si < n_segs; ++si) {
    Segment& s = segs[si];
    const Vec3 axis = (s.end - s.start).normalized();
    s.first_vertex = static_cast<std::int64_t>(mesh.vertices.size());
    std::int64_t prev = -1;
    for (std::int64_t r = 0; r < s.rings; ++r) {
      const double t = s.rings > 1 ? double(r) / double(s.rings - 1) : 0.0;
      const Vec3 center = s.start + (s.end - s.start) * t;
      const std::int64_t ring = add_ring(center, axis, s.radius);
      if (prev >= 0) ring_faces(prev, ring);
      prev = ring;
    }
    if (s.tip) {
      mesh.vertices.push_back(s.end + axis * (s.radius * 0.8));
      tips[si] = static_cast<std::int64_t>(mesh.vertices.size()) - 1;
      fan_to(prev, tips[si]);
    } else {
      tips[si] = -1;
    }
  }

  const Segment& torso = segs[0];
  auto torso_last_ring = torso.first_vertex + (torso.rings - 1) * 4;
  fan_to(torso.first_vertex, pelvis_idx);           // close the torso bottom
  ring_faces(torso_last_ring, segs[1].first_vertex);  // neck bridge

  // Weld limb root rings to the nearest torso vertex so the edge graph stays
  // connected.
  auto weld = [&](const Segment& limb) {
    Vec3 root_center{0, 0, 0};
    for (int a = 0; a < 4; ++a)
      root_center += mesh.vertices[static_cast<size_t>(limb.first_vertex + a)];
    root_center = root_center / 4.0;
    std::int64_t best = pelvis_idx;
    double best_d = (mesh.vertices[static_cast<size_t>(pelvis_idx)] - root_center).sqnorm();
    for (std::int64_t i = torso.first_vertex; i < torso.first_vertex + torso.rings * 4; ++i) {
      const double d = (mesh.vertices[static_cast<size_t>(i)] - root_center).sqnorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    fan_to(limb.first_vertex, best);
  };
  for (int si = 2; si < n_segs; ++si) weld(segs[si]);

  require(static_cast<std::int64_t>(mesh.vertices.size()) == full_vertices,
          "template: internal vertex budget error");

  // Named regions.
  auto seg_last_ring_and_tip = [&](int si) {
    std::vector<std::int64_t> ids;
    const Segment& s = segs[si];
    const std::int64_t ring = s.first_vertex + (s.rings - 1) * 4;
    for (int a = 0; a < 4; ++a) ids.push_back(ring + a);
    if (tips[si] >= 0) ids.push_back(tips[si]);
    return ids;
  };
  mesh.regions["hand"] = seg_last_ring_and_tip(2);
  mesh.regions["hand_left"] = seg_last_ring_and_tip(3);
  mesh.regions["foot"] = seg_last_ring_and_tip(4);
  mesh.regions["foot_left"] = seg_last_ring_and_tip(5);
  std::vector<std::int64_t> hip = {pelvis_idx};
  for (int a = 0; a < 4; ++a) hip.push_back(torso.first_vertex + a);
  mesh.regions["hip"] = hip;
  std::vector<std::int64_t> back;
  for (std::int64_t i = torso.first_vertex; i < torso.first_vertex + torso.rings * 4; ++i)
    if (mesh.vertices[static_cast<size_t>(i)].y < 0) back.push_back(i);
  mesh.regions["back"] = back;

  for (auto idx : hip) mesh.pelvis_weights.push_back({idx, 1.0 / double(hip.size())});

  // Block-averaging downsample map: row i covers a contiguous index span.
  mesh.downsample_map.resize(static_cast<size_t>(sampled_vertices));
  for (std::int64_t i = 0; i < sampled_vertices; ++i) {
    const std::int64_t c0 = i * full_vertices / sampled_vertices;
    const std::int64_t c1 = (i + 1) * full_vertices / sampled_vertices;
    auto& row = mesh.downsample_map[static_cast<size_t>(i)];
    for (std::int64_t c = c0; c < std::max(c1, c0 + 1); ++c)
      row.push_back({c, 1.0 / double(std::max<std::int64_t>(c1 - c0, 1))});
  }

  mesh.validate();
  return mesh;
}

}  // namespace lemon::data
