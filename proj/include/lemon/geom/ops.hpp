#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lemon/geom/types.hpp"

namespace lemon::geom {

// k nearest neighbors per point, self excluded, sorted by ascending distance
// with ties broken by lower index. Rejects k >= N.
std::vector<std::vector<std::int64_t>> knn_graph(const PointSet& points, int k);

struct NormalEstimate {
  PointSet points;                      // input points plus oriented normals
  std::vector<std::int64_t> degenerate;  // rank-deficient neighborhoods (normal set to +z)
};

// PCA normals over k-neighborhoods, oriented by spanning-tree propagation from
// the highest-z point (seed oriented toward +z).
NormalEstimate estimate_normals(const PointSet& points, int k);

// Mean osculating-circle normal curvature over each point's k neighbors.
// Sign convention: convex surfaces with outward normals get positive values
// (unit sphere with outward normals -> +1).
CurvatureField normal_curvature(const PointSet& points, int k);

// downsample_map @ full_vertices.
std::vector<Vec3> downsample_vertices(const TemplateMesh& mesh,
                                      const std::vector<Vec3>& full_vertices);

// Multi-source Dijkstra over the mesh edge graph with Euclidean edge weights.
// Returns one distance (meters) per query vertex.
std::vector<double> geodesic_nearest(const TemplateMesh& mesh,
                                     const std::vector<std::int64_t>& sources,
                                     const std::vector<std::int64_t>& queries);

Vec3 pelvis_position(const TemplateMesh& mesh, const std::vector<Vec3>& vertices);

// Undirected edge adjacency derived from faces: per-vertex (neighbor, length).
std::vector<std::vector<std::pair<std::int64_t, double>>> edge_graph(const TemplateMesh& mesh);

bool mesh_connected(const TemplateMesh& mesh);

// Curvature cache file: 8-byte magic "LMCV0001", u32 little-endian count,
// then count little-endian IEEE-754 f32 values.
void write_curvature_cache(const std::string& path, const std::vector<float>& values);
std::vector<float> read_curvature_cache(const std::string& path);

}  // namespace lemon::geom
