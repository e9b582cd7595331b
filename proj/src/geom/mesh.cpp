#include <algorithm>
#include <limits>
#include <queue>

#include "lemon/geom/ops.hpp"

namespace lemon::geom {

void TemplateMesh::validate() const {
  const std::int64_t v = vertex_count();
  require(v > 0, "mesh has no vertices");
  for (const auto& f : faces)
    for (auto idx : f) require(idx >= 0 && idx < v, "face index out of range");
  for (const auto& row : downsample_map) {
    double s = 0;
    for (const auto& [col, w] : row) {
      require(col >= 0 && col < v, "downsample column out of range");
      s += w;
    }
    require(std::abs(s - 1.0) <= 1e-6, "downsample row does not sum to 1");
  }
  double ps = 0;
  for (const auto& [col, w] : pelvis_weights) {
    require(col >= 0 && col < v, "pelvis weight index out of range");
    ps += w;
  }
  require(std::abs(ps - 1.0) <= 1e-6, "pelvis weights do not sum to 1");
  require(mesh_connected(*this), "mesh edge graph is not connected");
}

std::vector<std::vector<std::pair<std::int64_t, double>>> edge_graph(const TemplateMesh& mesh) {
  const std::int64_t v = mesh.vertex_count();
  std::vector<std::vector<std::pair<std::int64_t, double>>> adj(static_cast<size_t>(v));
  auto add_edge = [&](std::int64_t a, std::int64_t b) {
    for (const auto& [nb, w] : adj[static_cast<size_t>(a)])
      if (nb == b) return;
    const double w = (mesh.vertices[static_cast<size_t>(a)] -
                      mesh.vertices[static_cast<size_t>(b)])
                         .norm();
    adj[static_cast<size_t>(a)].push_back({b, w});
    adj[static_cast<size_t>(b)].push_back({a, w});
  };
  for (const auto& f : mesh.faces) {
    add_edge(f[0], f[1]);
    add_edge(f[1], f[2]);
    add_edge(f[2], f[0]);
  }
  return adj;
}

bool mesh_connected(const TemplateMesh& mesh) {
  const std::int64_t v = mesh.vertex_count();
  if (v == 0) return false;
  const auto adj = edge_graph(mesh);
  std::vector<char> seen(static_cast<size_t>(v), 0);
  std::queue<std::int64_t> q;
  q.push(0);
  seen[0] = 1;
  std::int64_t count = 1;
  while (!q.empty()) {
    const std::int64_t u = q.front();
    q.pop();
    for (const auto& [nb, w] : adj[static_cast<size_t>(u)]) {
      (void)w;
      if (!seen[static_cast<size_t>(nb)]) {
        seen[static_cast<size_t>(nb)] = 1;
        ++count;
        q.push(nb);
      }
    }
  }
  return count == v;
}

std::vector<Vec3> downsample_vertices(const TemplateMesh& mesh,
                                      const std::vector<Vec3>& full_vertices) {
  require(static_cast<std::int64_t>(full_vertices.size()) == mesh.vertex_count(),
          "downsample: vertex count mismatch");
  std::vector<Vec3> out(mesh.downsample_map.size());
  for (size_t r = 0; r < mesh.downsample_map.size(); ++r) {
    Vec3 acc{0, 0, 0};
    for (const auto& [col, w] : mesh.downsample_map[r])
      acc += full_vertices[static_cast<size_t>(col)] * w;
    out[r] = acc;
  }
  return out;
}

std::vector<double> geodesic_nearest(const TemplateMesh& mesh,
                                     const std::vector<std::int64_t>& sources,
                                     const std::vector<std::int64_t>& queries) {
  require(!sources.empty(), "geodesic: empty source set");
  const std::int64_t v = mesh.vertex_count();
  for (auto s : sources) require(s >= 0 && s < v, "geodesic: source index out of range");
  for (auto q : queries) require(q >= 0 && q < v, "geodesic: query index out of range");

  const auto adj = edge_graph(mesh);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(v), inf);
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (auto s : sources) {
    dist[static_cast<size_t>(s)] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(u)]) continue;
    for (const auto& [nb, w] : adj[static_cast<size_t>(u)]) {
      const double nd = d + w;
      if (nd < dist[static_cast<size_t>(nb)]) {
        dist[static_cast<size_t>(nb)] = nd;
        pq.push({nd, nb});
      }
    }
  }
  std::vector<double> out(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) out[i] = dist[static_cast<size_t>(queries[i])];
  return out;
}

Vec3 pelvis_position(const TemplateMesh& mesh, const std::vector<Vec3>& vertices) {
  require(static_cast<std::int64_t>(vertices.size()) == mesh.vertex_count(),
          "pelvis: vertex count mismatch");
  Vec3 acc{0, 0, 0};
  for (const auto& [col, w] : mesh.pelvis_weights)
    acc += vertices[static_cast<size_t>(col)] * w;
  return acc;
}

}  // namespace lemon::geom
