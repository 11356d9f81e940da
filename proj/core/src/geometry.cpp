#include "censtl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace censtl::geometry {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kVertexTolerance = 1e-9;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return distance(p, Point2{a.x + t * dx, a.y + t * dy});
}

bool near(Point2 a, Point2 b) {
  return std::abs(a.x - b.x) <= kVertexTolerance && std::abs(a.y - b.y) <= kVertexTolerance;
}

std::vector<Point2> dedupe_cyclic(std::vector<Point2> pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (out.empty() || !near(out.back(), p)) out.push_back(p);
  }
  while (out.size() > 1 && near(out.front(), out.back())) out.pop_back();
  return out;
}

double signed_area(const std::vector<Point2>& pts) {
  double area = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    area += p.x * q.y - q.x * p.y;
  }
  return 0.5 * area;
}

// Drops vertices that lie on the segment between their neighbours.
std::vector<Point2> drop_collinear(std::vector<Point2> pts) {
  if (pts.size() < 3) return pts;
  bool changed = true;
  while (changed && pts.size() > 2) {
    changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& prev = pts[(i + pts.size() - 1) % pts.size()];
      const auto& next = pts[(i + 1) % pts.size()];
      const double scale = std::max(1.0, distance(prev, next));
      if (std::abs(cross(prev, pts[i], next)) <= kVertexTolerance * scale &&
          segment_distance(pts[i], prev, next) <= kVertexTolerance * scale) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return pts;
}

}  // namespace

HalfPlanePredicate::HalfPlanePredicate(std::vector<HalfSpace> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw GeometryError("half-plane predicate needs at least one row");
  const std::size_t w = rows_.front().normal.size();
  if (w == 0) throw GeometryError("half-plane predicate has zero dimension");
  for (const auto& row : rows_) {
    if (row.normal.size() != w) throw GeometryError("half-plane rows have ragged dimensions");
    const double norm = std::sqrt(dot(row.normal, row.normal));
    if (std::abs(norm - 1.0) > kUnitTolerance) {
      throw GeometryError("half-plane normal is not unit length (norm " + std::to_string(norm) + ")");
    }
    if (!std::isfinite(row.offset)) throw GeometryError("half-plane offset is not finite");
  }
}

HalfPlanePredicate HalfPlanePredicate::normalized(std::vector<HalfSpace> rows) {
  for (auto& row : rows) {
    const double norm = std::sqrt(dot(row.normal, row.normal));
    if (norm == 0.0 || !std::isfinite(norm)) throw GeometryError("half-plane normal is zero");
    if (std::abs(norm - 1.0) > 1e-12) {
      for (auto& a : row.normal) a /= norm;
      row.offset /= norm;
    }
  }
  return HalfPlanePredicate(std::move(rows));
}

HalfPlanePredicate trig_to_halfplane(const TrigParams& params) {
  std::vector<HalfSpace> rows;
  rows.reserve(params.size());
  for (const auto& row : params) {
    const std::size_t w = row.angles.size() + 1;
    std::vector<double> a(w);
    double sin_prefix = 1.0;
    for (std::size_t j = 0; j + 1 < w; ++j) {
      a[j] = sin_prefix * std::cos(row.angles[j]);
      sin_prefix *= std::sin(row.angles[j]);
    }
    a[w - 1] = sin_prefix;
    rows.push_back(HalfSpace{std::move(a), row.offset});
  }
  return HalfPlanePredicate(std::move(rows));
}

double predicate_robustness(const HalfPlanePredicate& predicate, std::span<const double> x) {
  if (predicate.dimension() != x.size()) {
    throw GeometryError("predicate dimension " + std::to_string(predicate.dimension()) +
                        " does not match observation dimension " + std::to_string(x.size()));
  }
  double r = std::numeric_limits<double>::infinity();
  for (const auto& row : predicate.rows()) r = std::min(r, dot(row.normal, x) - row.offset);
  return r;
}

double Box::diagonal() const { return std::hypot(xmax - xmin, ymax - ymin); }

Polygon make_convex_polygon(std::vector<Point2> vertices) {
  auto pts = dedupe_cyclic(std::move(vertices));
  if (pts.size() >= 3) {
    if (signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      const auto& c = pts[(i + 2) % pts.size()];
      if (cross(a, b, c) < -kVertexTolerance * std::max(1.0, distance(a, c))) {
        throw GeometryError("polygon is not convex");
      }
    }
  }
  return Polygon{std::move(pts)};
}

Polygon box_polygon(const Box& box) {
  if (!(box.xmin <= box.xmax && box.ymin <= box.ymax)) throw GeometryError("malformed bounding box");
  return make_convex_polygon({{box.xmin, box.ymin}, {box.xmax, box.ymin}, {box.xmax, box.ymax}, {box.xmin, box.ymax}});
}

Polygon enumerate_vertices(const HalfPlanePredicate& predicate, const Box& bbox) {
  if (predicate.dimension() != 2) {
    throw GeometryError("vertex enumeration supports planar predicates only (got dimension " +
                        std::to_string(predicate.dimension()) + ")");
  }
  if (!std::isfinite(bbox.diagonal())) throw GeometryError("bounding box must be finite");
  std::vector<Point2> poly = box_polygon(bbox).vertices;
  const double scale = std::max(1.0, bbox.diagonal());
  // Sutherland-Hodgman against the closed half-plane a.x >= b.
  for (const auto& row : predicate.rows()) {
    if (poly.empty()) break;
    const double ax = row.normal[0];
    const double ay = row.normal[1];
    auto margin = [&](Point2 p) { return ax * p.x + ay * p.y - row.offset; };
    std::vector<Point2> clipped;
    clipped.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 p = poly[i];
      const Point2 q = poly[(i + 1) % poly.size()];
      const double mp = margin(p);
      const double mq = margin(q);
      const bool p_in = mp >= -kVertexTolerance * scale;
      const bool q_in = mq >= -kVertexTolerance * scale;
      if (p_in) clipped.push_back(p);
      if (p_in != q_in) {
        const double t = mp / (mp - mq);
        clipped.push_back(Point2{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    poly = dedupe_cyclic(std::move(clipped));
  }
  poly = drop_collinear(std::move(poly));
  if (poly.size() >= 3 && signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return Polygon{std::move(poly)};
}

double point_polygon_distance(Point2 point, const Polygon& polygon) {
  const auto& v = polygon.vertices;
  if (v.empty()) throw GeometryError("distance to an empty polygon is undefined");
  if (v.size() == 1) return distance(point, v[0]);
  if (v.size() == 2) return segment_distance(point, v[0], v[1]);
  bool inside = true;
  for (std::size_t i = 0; i < v.size() && inside; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    if (cross(a, b, point) < -kVertexTolerance * std::max(1.0, distance(a, b))) inside = false;
  }
  if (inside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, segment_distance(point, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

double hausdorff(const Polygon& a, const Polygon& b) {
  if (a.empty() || b.empty()) throw GeometryError("Hausdorff distance needs two non-empty polygons");
  // Distance to a convex set is convex, so each directed supremum is attained
  // at a vertex of the source polygon.
  auto directed = [](const Polygon& from, const Polygon& to) {
    double d = 0.0;
    for (const auto& p : from.vertices) d = std::max(d, point_polygon_distance(p, to));
    return d;
  };
  return std::max(directed(a, b), directed(b, a));
}

HalfPlanePredicate polygon_to_predicate(const Polygon& polygon) {
  const auto& v = polygon.vertices;
  if (v.size() < 3) throw GeometryError("a predicate needs a polygon with at least 3 vertices");
  std::vector<HalfSpace> rows;
  rows.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    const double len = distance(p, q);
    const double nx = -(q.y - p.y) / len;
    const double ny = (q.x - p.x) / len;
    rows.push_back(HalfSpace{{nx, ny}, nx * p.x + ny * p.y});
  }
  return HalfPlanePredicate(std::move(rows));
}

}  // namespace censtl::geometry
