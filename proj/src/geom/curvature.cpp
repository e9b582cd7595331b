#include <cmath>

#include "lemon/geom/ops.hpp"

namespace lemon::geom {

namespace {

// Deterministic tangent basis: Gram-Schmidt of the global +x axis against the
// normal, +y fallback when nearly parallel.
LocalFrame frame_at(const Vec3& origin, const Vec3& normal) {
  LocalFrame f;
  f.origin = origin;
  f.n = normal.normalized();
  Vec3 seed{1, 0, 0};
  Vec3 x = seed - f.n * f.n.dot(seed);
  if (x.norm() < 1e-6) {
    seed = {0, 1, 0};
    x = seed - f.n * f.n.dot(seed);
  }
  f.x = x.normalized();
  f.y = f.n.cross(f.x);
  return f;
}

}  // namespace

CurvatureField normal_curvature(const PointSet& points, int k) {
  require(points.has_normals(), "normal_curvature: points carry no normals");
  require(k >= 3, "normal_curvature: k must be at least 3");
  points.validate();
  const std::int64_t n = points.size();
  const auto nbrs = knn_graph(points, k);

  CurvatureField field;
  field.neighborhood_size = k;
  field.values.resize(static_cast<size_t>(n), 0.0);

  for (std::int64_t i = 0; i < n; ++i) {
    const LocalFrame f = frame_at(points.points[static_cast<size_t>(i)],
                                  points.normals[static_cast<size_t>(i)]);
    double sum = 0.0;
    int used = 0;
    for (auto j : nbrs[static_cast<size_t>(i)]) {
      const Vec3 d = points.points[static_cast<size_t>(j)] - f.origin;
      const double xi = d.dot(f.x);
      const double yi = d.dot(f.y);
      const double rho2 = xi * xi + yi * yi;
      if (rho2 < 1e-12) continue;  // neighbor projects onto the frame origin
      const double rho = std::sqrt(rho2);
      const Vec3& m = points.normals[static_cast<size_t>(j)];
      const double nx = m.dot(f.x);
      const double ny = m.dot(f.y);
      const double nz = m.dot(f.n);
      const double nxy = (xi * nx + yi * ny) / rho;
      const double denom = std::sqrt(nxy * nxy + nz * nz) * rho;
      if (denom < 1e-18) continue;
      sum += -nxy / denom;
      ++used;
    }
    if (used == 0) {
      field.values[static_cast<size_t>(i)] = 0.0;
      field.flagged.push_back(i);
    } else {
      // Flip so convex surfaces with outward normals come out positive.
      field.values[static_cast<size_t>(i)] = -sum / used;
    }
  }
  return field;
}

}  // namespace lemon::geom
