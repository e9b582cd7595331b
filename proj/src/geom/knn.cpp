#include <algorithm>

#include "lemon/geom/ops.hpp"

namespace lemon::geom {

std::vector<std::vector<std::int64_t>> knn_graph(const PointSet& points, int k) {
  const std::int64_t n = points.size();
  require(k >= 1, "knn: k must be positive");
  require(k < n, "knn: k must be smaller than the point count");
  for (const auto& p : points.points) require(p.finite(), "knn: non-finite point");

  std::vector<std::vector<std::int64_t>> out(static_cast<size_t>(n));
  std::vector<std::pair<double, std::int64_t>> dists(static_cast<size_t>(n - 1));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t m = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists[static_cast<size_t>(m++)] = {(points.points[j] - points.points[i]).sqnorm(), j};
    }
    std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
    auto& row = out[static_cast<size_t>(i)];
    row.resize(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) row[static_cast<size_t>(j)] = dists[static_cast<size_t>(j)].second;
  }
  return out;
}

}  // namespace lemon::geom
