#include "navfly/planner.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "navfly/errors.hpp"

namespace navfly::eval {

using world::Obstacle;
using world::Vec2;

namespace {

constexpr int kCirclePolySides = 20;
constexpr double kVertexMargin = 1e-6;

void append_vertices(const Obstacle& o, double uav_radius, std::vector<Vec2>& out) {
  const double margin = uav_radius * (1.0 + kVertexMargin);
  if (const auto* c = std::get_if<world::Cylinder>(&o)) {
    // Circumscribed polygon of the inflated disc so every vertex clears it.
    const double rv = (c->radius + margin) / std::cos(M_PI / kCirclePolySides);
    for (int k = 0; k < kCirclePolySides; ++k) {
      const double a = 2.0 * M_PI * (k + 0.5) / kCirclePolySides;
      out.emplace_back(c->center.x() + rv * std::cos(a), c->center.y() + rv * std::sin(a));
    }
    return;
  }
  const auto& b = std::get<world::AxisBox>(o);
  const double m = margin;
  out.emplace_back(b.min.x() - m, b.min.y() - m);
  out.emplace_back(b.max.x() + m, b.min.y() - m);
  out.emplace_back(b.max.x() + m, b.max.y() + m);
  out.emplace_back(b.min.x() - m, b.max.y() + m);
}

}  // namespace

double optimal_path_length(const world::Scene& scene, const Vec2& start, const Vec2& goal,
                           double uav_radius) {
  if ((goal - start).norm() < 1e-12) return 0.0;

  std::vector<Vec2> nodes{start, goal};
  for (const auto& o : scene.obstacles) append_vertices(o, uav_radius, nodes);

  // Drop waypoint candidates buried inside another obstacle's inflation.
  std::vector<Vec2> usable;
  usable.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i < 2) {
      usable.push_back(nodes[i]);  // endpoints always participate
      continue;
    }
    bool free = true;
    for (const auto& o : scene.obstacles) {
      if (world::footprint_signed_distance(o, nodes[i]) <= uav_radius) {
        free = false;
        break;
      }
    }
    if (free) usable.push_back(nodes[i]);
  }

  const std::size_t n = usable.size();
  const auto edge_clear = [&](const Vec2& a, const Vec2& b) {
    for (const auto& o : scene.obstacles) {
      if (world::footprint_segment_distance(o, a, b) <= uav_radius) return false;
    }
    return true;
  };

  // Dijkstra over the visibility graph; edges tested lazily.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[0] = 0.0;
  heap.emplace(0.0, 0);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == 1) return d;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      const double w = (usable[v] - usable[u]).norm();
      if (d + w >= dist[v]) continue;
      if (!edge_clear(usable[u], usable[v])) continue;
      dist[v] = d + w;
      heap.emplace(dist[v], v);
    }
  }
  throw DomainError("optimal_path_length: goal unreachable");
}

}  // namespace navfly::eval
