#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lemon/util/errors.hpp"

namespace lemon::geom {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  double sqnorm() const { return dot(*this); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0 ? *this / n : Vec3{0, 0, 0};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

struct PointSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty or same length as points

  std::int64_t size() const { return static_cast<std::int64_t>(points.size()); }
  bool has_normals() const { return !normals.empty(); }

  void validate() const {
    require(points.size() >= 4, "point set needs at least 4 points");
    for (const auto& p : points) require(p.finite(), "non-finite point coordinate");
    if (has_normals()) {
      require(normals.size() == points.size(), "normal count != point count");
      for (const auto& n : normals)
        require(std::abs(n.norm() - 1.0) <= 1e-6, "normal is not unit length");
    }
  }
};

// Orthonormal frame at a point; n is the surface normal.
struct LocalFrame {
  Vec3 origin;
  Vec3 x, y, n;

  bool orthonormal(double tol = 1e-6) const {
    return std::abs(x.norm() - 1) <= tol && std::abs(y.norm() - 1) <= tol &&
           std::abs(n.norm() - 1) <= tol && std::abs(x.dot(y)) <= tol &&
           std::abs(x.dot(n)) <= tol && std::abs(y.dot(n)) <= tol;
  }
};

struct CurvatureField {
  std::vector<double> values;  // 1/meters, one per point
  int neighborhood_size = 0;
  std::vector<std::int64_t> flagged;  // points whose neighbors were all degenerate

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

// One sparse row: list of (column, weight).
using SparseRow = std::vector<std::pair<std::int64_t, double>>;

struct TemplateMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int64_t, 3>> faces;
  std::vector<SparseRow> downsample_map;  // V' rows over V columns, row-stochastic
  SparseRow pelvis_weights;               // weights over V, sums to 1
  std::map<std::string, std::vector<std::int64_t>> regions;

  std::int64_t vertex_count() const { return static_cast<std::int64_t>(vertices.size()); }
  std::int64_t sampled_count() const { return static_cast<std::int64_t>(downsample_map.size()); }

  void validate() const;
};

}  // namespace lemon::geom
