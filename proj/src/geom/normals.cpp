#include <algorithm>
#include <queue>

#include "lemon/geom/ops.hpp"

namespace lemon::geom {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
// Columns of v are eigenvectors, eigenvalues ascending in w.
void eig_sym3(double a[3][3], double w[3], double v[3][3]) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[i][j] = (i == j) ? 1.0 : 0.0;
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < 3; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < 3; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < 3; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
  }
  int order[3] = {0, 1, 2};
  double diag[3] = {a[0][0], a[1][1], a[2][2]};
  std::sort(order, order + 3, [&](int i, int j) { return diag[i] < diag[j]; });
  double vv[3][3];
  for (int k = 0; k < 3; ++k) {
    w[k] = diag[order[k]];
    for (int i = 0; i < 3; ++i) vv[i][k] = v[i][order[k]];
  }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) v[i][k] = vv[i][k];
}

}  // namespace

NormalEstimate estimate_normals(const PointSet& points, int k) {
  require(k >= 3, "estimate_normals: k must be at least 3");
  points.validate();
  const std::int64_t n = points.size();
  const auto nbrs = knn_graph(points, k);

  NormalEstimate est;
  est.points.points = points.points;
  est.points.normals.resize(static_cast<size_t>(n));

  for (std::int64_t i = 0; i < n; ++i) {
    Vec3 mean{0, 0, 0};
    for (auto j : nbrs[static_cast<size_t>(i)]) mean += points.points[static_cast<size_t>(j)];
    mean += points.points[static_cast<size_t>(i)];
    mean = mean / static_cast<double>(k + 1);

    double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    auto accumulate = [&](const Vec3& p) {
      const Vec3 d = p - mean;
      const double dv[3] = {d.x, d.y, d.z};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cov[r][c] += dv[r] * dv[c];
    };
    accumulate(points.points[static_cast<size_t>(i)]);
    for (auto j : nbrs[static_cast<size_t>(i)]) accumulate(points.points[static_cast<size_t>(j)]);

    double w[3], v[3][3];
    eig_sym3(cov, w, v);
    // rank < 2 when the two smallest eigenvalues both vanish.
    if (w[1] <= 1e-12 * std::max(w[2], 1e-300)) {
      est.points.normals[static_cast<size_t>(i)] = {0, 0, 1};
      est.degenerate.push_back(i);
    } else {
      est.points.normals[static_cast<size_t>(i)] = Vec3{v[0][0], v[1][0], v[2][0]}.normalized();
    }
  }

  // Orientation: spanning tree over the symmetrized k-NN graph (Prim, edge
  // weight = distance), seeded at the highest-z point with its normal flipped
  // toward +z. Disconnected components are re-seeded the same way.
  std::vector<std::vector<std::int64_t>> adj(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    for (auto j : nbrs[static_cast<size_t>(i)]) {
      adj[static_cast<size_t>(i)].push_back(j);
      adj[static_cast<size_t>(j)].push_back(i);
    }

  std::vector<char> visited(static_cast<size_t>(n), 0);
  using Edge = std::pair<double, std::pair<std::int64_t, std::int64_t>>;  // w, (from, to)
  std::vector<std::int64_t> order_by_z(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) order_by_z[static_cast<size_t>(i)] = i;
  std::sort(order_by_z.begin(), order_by_z.end(), [&](std::int64_t a, std::int64_t b) {
    const double za = points.points[static_cast<size_t>(a)].z;
    const double zb = points.points[static_cast<size_t>(b)].z;
    return za != zb ? za > zb : a < b;
  });

  for (std::int64_t seed : order_by_z) {
    if (visited[static_cast<size_t>(seed)]) continue;
    if (est.points.normals[static_cast<size_t>(seed)].z < 0)
      est.points.normals[static_cast<size_t>(seed)] =
          est.points.normals[static_cast<size_t>(seed)] * -1.0;
    std::priority_queue<Edge, std::vector<Edge>, std::greater<Edge>> pq;
    visited[static_cast<size_t>(seed)] = 1;
    auto push_edges = [&](std::int64_t u) {
      for (auto vtx : adj[static_cast<size_t>(u)])
        if (!visited[static_cast<size_t>(vtx)])
          pq.push({(points.points[static_cast<size_t>(u)] -
                    points.points[static_cast<size_t>(vtx)])
                       .norm(),
                   {u, vtx}});
    };
    push_edges(seed);
    while (!pq.empty()) {
      auto [wgt, uv] = pq.top();
      pq.pop();
      (void)wgt;
      const auto [u, vtx] = uv;
      if (visited[static_cast<size_t>(vtx)]) continue;
      visited[static_cast<size_t>(vtx)] = 1;
      if (est.points.normals[static_cast<size_t>(u)].dot(
              est.points.normals[static_cast<size_t>(vtx)]) < 0)
        est.points.normals[static_cast<size_t>(vtx)] =
            est.points.normals[static_cast<size_t>(vtx)] * -1.0;
      push_edges(vtx);
    }
  }
  return est;
}

}  // namespace lemon::geom
