#include "lemon/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lemon/data/radius_table.hpp"
#include "lemon/data/template_mesh.hpp"
#include "lemon/geom/ops.hpp"
#include "lemon/util/rng.hpp"

namespace lemon::data {

using geom::Vec3;

namespace {

constexpr double kPi = 3.14159265358979323846;

float q32(double v) { return static_cast<float>(v); }
double quantize(double v) { return double(static_cast<float>(v)); }
Vec3 quantize(const Vec3& v) { return {quantize(v.x), quantize(v.y), quantize(v.z)}; }

Vec3 rotate_z(const Vec3& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

// Rodrigues rotation taking +z onto `target` (unit).
Vec3 align_z_to(const Vec3& p, const Vec3& target) {
  const Vec3 z{0, 0, 1};
  const Vec3 axis = z.cross(target);
  const double s = axis.norm();
  const double c = z.dot(target);
  if (s < 1e-9) return c > 0 ? p : Vec3{p.x, -p.y, -p.z};
  const Vec3 k = axis / s;
  return p * c + k.cross(p) * s + k * (k.dot(p) * (1.0 - c));
}

// --- parametric object surfaces, sampled in a local frame centered near 0 ---

std::vector<Vec3> sample_sphere_cap(Rng& rng, std::int64_t n, double radius, double cap_deg) {
  const double cos_max = std::cos(cap_deg * kPi / 180.0);
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (auto& p : pts) {
    const double u = rng.uniform(cos_max, 1.0);  // cos(theta), area-uniform
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    p = Vec3{s * std::cos(phi), s * std::sin(phi), u} * radius;
  }
  return pts;
}

std::vector<Vec3> sample_box(Rng& rng, std::int64_t n, double ax, double ay, double az) {
  // face areas: +-x: ay*az, +-y: ax*az, +-z: ax*ay
  const double areas[3] = {ay * az, ax * az, ax * ay};
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (auto& p : pts) {
    double pick = rng.uniform(0.0, total);
    int axis = 0;
    double sign = 1.0;
    for (int a = 0; a < 3; ++a) {
      if (pick < areas[a]) {
        axis = a;
        sign = 1.0;
        break;
      }
      pick -= areas[a];
      if (pick < areas[a]) {
        axis = a;
        sign = -1.0;
        break;
      }
      pick -= areas[a];
    }
    const double u = rng.uniform(-0.5, 0.5);
    const double v = rng.uniform(-0.5, 0.5);
    switch (axis) {
      case 0: p = {sign * ax / 2, u * ay, v * az}; break;
      case 1: p = {u * ax, sign * ay / 2, v * az}; break;
      default: p = {u * ax, v * ay, sign * az / 2}; break;
    }
  }
  return pts;
}

std::vector<Vec3> sample_cylinder(Rng& rng, std::int64_t n, double radius, double height,
                                  bool caps) {
  const double wall = 2.0 * kPi * radius * height;
  const double cap = caps ? kPi * radius * radius : 0.0;
  const double total = wall + 2.0 * cap;
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (auto& p : pts) {
    const double pick = rng.uniform(0.0, total);
    if (pick < wall) {
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      const double z = rng.uniform(-height / 2, height / 2);
      p = {radius * std::cos(phi), radius * std::sin(phi), z};
    } else {
      const double sign = pick < wall + cap ? 1.0 : -1.0;
      const double r = radius * std::sqrt(rng.uniform());
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      p = {r * std::cos(phi), r * std::sin(phi), sign * height / 2};
    }
  }
  return pts;
}

std::vector<Vec3> make_object(Rng& rng, const ScenarioConfig& sc, std::int64_t n, double scale) {
  if (sc.object_kind == "sphere-cap") return sample_sphere_cap(rng, n, scale, 150.0);
  if (sc.object_kind == "box") return sample_box(rng, n, scale, scale * 0.9, scale * 0.6);
  if (sc.object_kind == "cylinder") return sample_cylinder(rng, n, scale * 0.5, scale * 1.6, true);
  if (sc.object_kind == "stick") return sample_cylinder(rng, n, 0.015, scale, true);
  throw ValidationError("unknown object kind: " + sc.object_kind);
}

// --- deterministic orthographic rasterizer (front view, x right, z up) -----

struct Raster {
  std::int64_t side;
  std::vector<float> rgb;          // side*side*3
  std::vector<std::uint8_t> human;
  std::vector<std::uint8_t> object;

  explicit Raster(std::int64_t s)
      : side(s),
        rgb(static_cast<size_t>(s * s * 3)),
        human(static_cast<size_t>(s * s), 0),
        object(static_cast<size_t>(s * s), 0) {
    for (std::int64_t i = 0; i < s * s; ++i) {
      rgb[static_cast<size_t>(3 * i)] = 0.10f;
      rgb[static_cast<size_t>(3 * i + 1)] = 0.12f;
      rgb[static_cast<size_t>(3 * i + 2)] = 0.16f;
    }
  }

  // world [-1,1] x [-0.1,1.9] -> pixels
  void to_px(const Vec3& w, double& px, double& py) const {
    px = (w.x + 1.0) / 2.0 * double(side);
    py = (1.9 - w.z) / 2.0 * double(side);
  }

  void put(std::int64_t x, std::int64_t y, float r, float g, float b, bool is_human) {
    if (x < 0 || x >= side || y < 0 || y >= side) return;
    const size_t i = static_cast<size_t>(y * side + x);
    rgb[3 * i] = r;
    rgb[3 * i + 1] = g;
    rgb[3 * i + 2] = b;
    (is_human ? human : object)[i] = 1;
  }

  void fill_triangle(const Vec3& a, const Vec3& b, const Vec3& c, float cr, float cg, float cb,
                     bool is_human) {
    double ax, ay, bx, by, cx, cy;
    to_px(a, ax, ay);
    to_px(b, bx, by);
    to_px(c, cx, cy);
    const std::int64_t x0 = static_cast<std::int64_t>(std::floor(std::min({ax, bx, cx})));
    const std::int64_t x1 = static_cast<std::int64_t>(std::ceil(std::max({ax, bx, cx})));
    const std::int64_t y0 = static_cast<std::int64_t>(std::floor(std::min({ay, by, cy})));
    const std::int64_t y1 = static_cast<std::int64_t>(std::ceil(std::max({ay, by, cy})));
    const double den = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy);
    if (std::abs(den) < 1e-12) return;
    for (std::int64_t y = y0; y <= y1; ++y)
      for (std::int64_t x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double w0 = ((by - cy) * (px - cx) + (cx - bx) * (py - cy)) / den;
        const double w1 = ((cy - ay) * (px - cx) + (ax - cx) * (py - cy)) / den;
        const double w2 = 1.0 - w0 - w1;
        if (w0 >= 0 && w1 >= 0 && w2 >= 0) put(x, y, cr, cg, cb, is_human);
      }
  }

  void splat_disk(const Vec3& p, double radius_px, float cr, float cg, float cb) {
    double px, py;
    to_px(p, px, py);
    const std::int64_t r = static_cast<std::int64_t>(std::ceil(radius_px));
    const std::int64_t cx = static_cast<std::int64_t>(px);
    const std::int64_t cy = static_cast<std::int64_t>(py);
    for (std::int64_t y = cy - r; y <= cy + r; ++y)
      for (std::int64_t x = cx - r; x <= cx + r; ++x) {
        const double dx = x + 0.5 - px, dy = y + 0.5 - py;
        if (dx * dx + dy * dy <= radius_px * radius_px) put(x, y, cr, cg, cb, false);
      }
  }
};

double min_dist_to_points(const Vec3& p, const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pts) best = std::min(best, (p - q).sqnorm());
  return std::sqrt(best);
}

}  // namespace

void GenConfig::validate() const {
  require(!scenarios.empty(), "generator config needs at least one scenario");
  require(image_side >= 16, "image side too small");
  require(object_points >= 32, "too few object points");
  require(contact_radius > 0, "contact radius must be positive");
  require(samples_per_scenario >= 1, "samples_per_scenario must be positive");
  const auto& table = builtin_radius_table();
  for (const auto& sc : scenarios) {
    require(!sc.name.empty(), "scenario without a name");
    table.radius_for(sc.category);  // throws for unknown categories
    require(sc.object_scale > 0, "scenario object_scale must be positive");
  }
}

std::vector<ScenarioConfig> default_scenarios() {
  return {
      {"grasp-stick", "stick", "hand", "Baseballbat", 0, 0.55},
      {"sit-box", "box", "hip", "Chair", 1, 0.45},
      {"lift-sphere", "sphere-cap", "hand_left", "Bowl", 2, 0.13},
      {"ride-cylinder", "cylinder", "hip", "Motorcycle", 3, 0.40},
  };
}

std::vector<InteractionSample> generate_synthetic(const GenConfig& config, std::uint64_t seed) {
  config.validate();
  const geom::TemplateMesh tmpl = build_humanoid_template(config.human_full, config.human_sampled);
  const Rng master(seed);

  std::vector<InteractionSample> out;
  std::int64_t sample_index = 0;
  for (const auto& sc : config.scenarios) {
    const auto region_it = tmpl.regions.find(sc.attach_region);
    require(region_it != tmpl.regions.end(), "scenario attach region not on template: " +
                                                 sc.attach_region);
    const auto& region = region_it->second;

    for (std::int64_t si = 0; si < config.samples_per_scenario; ++si, ++sample_index) {
      Rng rng = master.fork(static_cast<std::uint64_t>(sample_index));
      InteractionSample s;
      s.id = sc.name + "-" + std::to_string(si);
      s.object_category = sc.category;
      s.intent_class = sc.intent_class;

      // Posed human: template with a small global pose jitter.
      const double yaw = rng.uniform(-0.15, 0.15);
      const double sway = rng.uniform(-0.02, 0.02);
      s.human_vertices_full.resize(tmpl.vertices.size());
      for (size_t i = 0; i < tmpl.vertices.size(); ++i) {
        Vec3 v = rotate_z(tmpl.vertices[i], yaw);
        v.x += sway;
        s.human_vertices_full[i] = quantize(v);
      }
      s.human_vertices_sampled.clear();
      for (const auto& v : geom::downsample_vertices(tmpl, s.human_vertices_full))
        s.human_vertices_sampled.push_back(quantize(v));

      // Object: sample the surface, orient, then slide it against the
      // attachment anchor.
      const double scale = sc.object_scale * rng.uniform(0.9, 1.1);
      std::vector<Vec3> obj = make_object(rng, sc, config.object_points, scale);
      const double spin = rng.uniform(0.0, 2.0 * kPi);
      for (auto& p : obj) p = rotate_z(p, spin);

      Vec3 body_center{0, 0, 1.0};
      body_center = rotate_z(body_center, yaw);
      const std::int64_t anchor_idx =
          region[static_cast<size_t>(rng.uniform_index(region.size()))];
      const Vec3 anchor = s.human_vertices_full[static_cast<size_t>(anchor_idx)];
      Vec3 dir = (anchor - body_center);
      dir.z *= 0.3;  // push mostly sideways
      dir = dir.normalized();

      // Sticks point away from the body so contact stays at the grip end.
      if (sc.object_kind == "stick")
        for (auto& p : obj) p = align_z_to(p, dir);

      // reach: object extent opposite the approach direction
      double reach = 0;
      for (const auto& p : obj) reach = std::max(reach, -p.dot(dir));
      const double depth = rng.uniform(0.004, 0.014);
      const Vec3 center = anchor + dir * (reach - depth);
      for (auto& p : obj) p = quantize(p + center);

      s.object_points.points = obj;

      // Contact: full-template vertices within contact_radius of the sampled
      // object surface.
      s.contact_gt.assign(s.human_vertices_full.size(), 0);
      std::vector<Vec3> contact_verts;
      for (size_t i = 0; i < s.human_vertices_full.size(); ++i) {
        if (min_dist_to_points(s.human_vertices_full[i], obj) <= config.contact_radius) {
          s.contact_gt[i] = 1;
          contact_verts.push_back(s.human_vertices_full[i]);
        }
      }
      if (contact_verts.empty())
        throw ValidationError("scenario '" + sc.name +
                              "' produced no contact vertices; adjust its attachment");

      // Affordance heat: exponential falloff from the contact region.
      const double tau = 2.0 * config.contact_radius;
      s.affordance_gt.resize(obj.size());
      for (size_t i = 0; i < obj.size(); ++i) {
        const double d = min_dist_to_points(obj[i], contact_verts);
        s.affordance_gt[i] = q32(std::min(1.0, std::exp(-d / tau)));
      }

      Vec3 centroid{0, 0, 0};
      for (const auto& p : obj) centroid += p;
      s.center_gt = quantize(centroid / double(obj.size()));

      // Curvatures, stored with the sample for direct reuse.
      geom::PointSet obj_ps{obj, {}};
      const auto obj_normals = geom::estimate_normals(obj_ps, config.curvature_k);
      auto oc = geom::normal_curvature(obj_normals.points, config.curvature_k);
      for (auto& v : oc.values) v = quantize(v);
      s.object_curvature = oc;

      geom::PointSet hum_ps{s.human_vertices_sampled, {}};
      const auto hum_normals = geom::estimate_normals(hum_ps, config.curvature_k);
      auto hc = geom::normal_curvature(hum_normals.points, config.curvature_k);
      for (auto& v : hc.values) v = quantize(v);
      s.human_curvature = hc;

      // Image: human silhouette triangles, then object point splats.
      Raster raster(config.image_side);
      for (const auto& f : tmpl.faces)
        raster.fill_triangle(s.human_vertices_full[static_cast<size_t>(f[0])],
                             s.human_vertices_full[static_cast<size_t>(f[1])],
                             s.human_vertices_full[static_cast<size_t>(f[2])], 0.78f, 0.62f,
                             0.52f, true);
      const float hue = 0.25f + 0.7f * float(sc.intent_class % 4) / 4.0f;
      for (const auto& p : obj)
        raster.splat_disk(p, double(config.image_side) / 96.0, hue, 0.30f, 0.85f - hue / 2);

      s.image.height = config.image_side;
      s.image.width = config.image_side;
      s.image.pixels =
          Tensor<float>::from({config.image_side * config.image_side, 3}, std::move(raster.rgb));
      s.image.human_mask = std::move(raster.human);
      s.image.object_mask = std::move(raster.object);

      s.validate();
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string scenario_region(const GenConfig& config, const std::string& sample_id) {
  for (const auto& sc : config.scenarios)
    if (sample_id.rfind(sc.name + "-", 0) == 0) return sc.attach_region;
  throw ValidationError("sample id does not match any scenario: " + sample_id);
}

}  // namespace lemon::data
