#include "navfly/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace navfly::world {

double signed_distance(const Cylinder& c, const Vec3& p) {
  const double dxy = std::hypot(p.x() - c.center.x(), p.y() - c.center.y()) - c.radius;
  const double half = 0.5 * c.height;
  const double dz = std::abs(p.z() - (c.center.z() + half)) - half;
  const double outside = std::hypot(std::max(dxy, 0.0), std::max(dz, 0.0));
  const double inside = std::min(std::max(dxy, dz), 0.0);
  return outside + inside;
}

double signed_distance(const AxisBox& b, const Vec3& p) {
  const Vec3 center = 0.5 * (b.min + b.max);
  const Vec3 half = 0.5 * (b.max - b.min);
  const Vec3 q = (p - center).cwiseAbs() - half;
  const Vec3 qpos = q.cwiseMax(0.0);
  const double outside = qpos.norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

double signed_distance(const Obstacle& o, const Vec3& p) {
  return std::visit([&](const auto& shape) { return signed_distance(shape, p); }, o);
}

namespace {

std::optional<double> accept(double t, double max_range) {
  if (t >= 0.0 && t <= max_range) return t;
  return std::nullopt;
}

void consider(std::optional<double>& best, std::optional<double> t) {
  if (t && (!best || *t < *best)) best = t;
}

}  // namespace

std::optional<double> ray_hit(const Cylinder& c, const Vec3& origin, const Vec3& dir,
                              double max_range) {
  std::optional<double> best;
  const double z0 = c.center.z();
  const double z1 = c.center.z() + c.height;

  // Lateral surface: quadratic in the xy projection.
  const double ox = origin.x() - c.center.x();
  const double oy = origin.y() - c.center.y();
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 1e-15) {
    const double bq = 2.0 * (ox * dir.x() + oy * dir.y());
    const double cq = ox * ox + oy * oy - c.radius * c.radius;
    const double disc = bq * bq - 4.0 * a * cq;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-bq - sq) / (2.0 * a), (-bq + sq) / (2.0 * a)}) {
        const double z = origin.z() + t * dir.z();
        if (z >= z0 && z <= z1) consider(best, accept(t, max_range));
      }
    }
  }

  // End caps.
  if (std::abs(dir.z()) > 1e-15) {
    for (const double zc : {z0, z1}) {
      const double t = (zc - origin.z()) / dir.z();
      const double x = origin.x() + t * dir.x() - c.center.x();
      const double y = origin.y() + t * dir.y() - c.center.y();
      if (x * x + y * y <= c.radius * c.radius) consider(best, accept(t, max_range));
    }
  }
  return best;
}

std::optional<double> ray_hit(const AxisBox& b, const Vec3& origin, const Vec3& dir,
                              double max_range) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir[k]) < 1e-15) {
      if (origin[k] < b.min[k] || origin[k] > b.max[k]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[k] - origin[k]) / dir[k];
    double t1 = (b.max[k] - origin[k]) / dir[k];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;
  if (t_enter >= 0.0) return accept(t_enter, max_range);
  // Origin inside: report the exit point.
  return accept(t_exit, max_range);
}

std::optional<double> ray_hit(const Obstacle& o, const Vec3& origin, const Vec3& dir,
                              double max_range) {
  return std::visit([&](const auto& shape) { return ray_hit(shape, origin, dir, max_range); }, o);
}

namespace {

struct FootprintBounds {
  double min_x, min_y, max_x, max_y;
};

FootprintBounds bounds_of(const Obstacle& o) {
  if (const auto* c = std::get_if<Cylinder>(&o)) {
    return {c->center.x() - c->radius, c->center.y() - c->radius,
            c->center.x() + c->radius, c->center.y() + c->radius};
  }
  const auto& b = std::get<AxisBox>(o);
  return {b.min.x(), b.min.y(), b.max.x(), b.max.y()};
}

bool footprint_contains(const Obstacle& o, double x, double y) {
  if (const auto* c = std::get_if<Cylinder>(&o)) {
    const double dx = x - c->center.x();
    const double dy = y - c->center.y();
    return dx * dx + dy * dy <= c->radius * c->radius;
  }
  const auto& b = std::get<AxisBox>(o);
  return x >= b.min.x() && x <= b.max.x() && y >= b.min.y() && y <= b.max.y();
}

}  // namespace

double footprint_area(const Obstacle& o) {
  if (const auto* c = std::get_if<Cylinder>(&o)) return M_PI * c->radius * c->radius;
  const auto& b = std::get<AxisBox>(o);
  return (b.max.x() - b.min.x()) * (b.max.y() - b.min.y());
}

double footprint_overlap_area(const Obstacle& a, const Obstacle& b, int samples_per_axis) {
  const auto ba = bounds_of(a);
  const auto bb = bounds_of(b);
  const double min_x = std::max(ba.min_x, bb.min_x);
  const double min_y = std::max(ba.min_y, bb.min_y);
  const double max_x = std::min(ba.max_x, bb.max_x);
  const double max_y = std::min(ba.max_y, bb.max_y);
  if (min_x >= max_x || min_y >= max_y) return 0.0;
  const double dx = (max_x - min_x) / samples_per_axis;
  const double dy = (max_y - min_y) / samples_per_axis;
  long hits = 0;
  for (int i = 0; i < samples_per_axis; ++i) {
    const double x = min_x + (i + 0.5) * dx;
    for (int j = 0; j < samples_per_axis; ++j) {
      const double y = min_y + (j + 0.5) * dy;
      if (footprint_contains(a, x, y) && footprint_contains(b, x, y)) ++hits;
    }
  }
  return static_cast<double>(hits) * dx * dy;
}

double footprint_signed_distance(const Obstacle& o, const Vec2& p) {
  if (const auto* c = std::get_if<Cylinder>(&o)) {
    return std::hypot(p.x() - c->center.x(), p.y() - c->center.y()) - c->radius;
  }
  const auto& b = std::get<AxisBox>(o);
  const Vec2 center(0.5 * (b.min.x() + b.max.x()), 0.5 * (b.min.y() + b.max.y()));
  const Vec2 half(0.5 * (b.max.x() - b.min.x()), 0.5 * (b.max.y() - b.min.y()));
  const Vec2 q = (p - center).cwiseAbs() - half;
  const Vec2 qpos = q.cwiseMax(0.0);
  return qpos.norm() + std::min(std::max(q.x(), q.y()), 0.0);
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const double d1 = orient(a0, a1, b0);
  const double d2 = orient(a0, a1, b1);
  const double d3 = orient(b0, b1, a0);
  const double d4 = orient(b0, b1, a1);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;  // proper crossing
  return std::min(std::min(point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)),
                  std::min(point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1)));
}

}  // namespace

double footprint_segment_distance(const Obstacle& o, const Vec2& a, const Vec2& b) {
  if (footprint_signed_distance(o, a) <= 0.0 || footprint_signed_distance(o, b) <= 0.0) return 0.0;
  if (const auto* c = std::get_if<Cylinder>(&o)) {
    const Vec2 center(c->center.x(), c->center.y());
    return std::max(point_segment_distance(center, a, b) - c->radius, 0.0);
  }
  const auto& box = std::get<AxisBox>(o);
  const Vec2 c0(box.min.x(), box.min.y());
  const Vec2 c1(box.max.x(), box.min.y());
  const Vec2 c2(box.max.x(), box.max.y());
  const Vec2 c3(box.min.x(), box.max.y());
  double d = segment_segment_distance(a, b, c0, c1);
  d = std::min(d, segment_segment_distance(a, b, c1, c2));
  d = std::min(d, segment_segment_distance(a, b, c2, c3));
  d = std::min(d, segment_segment_distance(a, b, c3, c0));
  return d;
}

}  // namespace navfly::world
