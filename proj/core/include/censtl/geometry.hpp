#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace censtl::geometry {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One strict linear inequality `normal . x > offset` with a unit normal.
struct HalfSpace {
  std::vector<double> normal;
  double offset = 0.0;

  bool operator==(const HalfSpace&) const = default;
};

/// Conjunction of half-spaces; the satisfying set is an open convex polyhedron.
class HalfPlanePredicate {
 public:
  HalfPlanePredicate() = default;
  /// Throws GeometryError on an empty row list, ragged dimensions or a
  /// normal whose Euclidean norm is not 1 within 1e-9.
  explicit HalfPlanePredicate(std::vector<HalfSpace> rows);

  /// Rescales each row to a unit normal before validating.
  static HalfPlanePredicate normalized(std::vector<HalfSpace> rows);

  const std::vector<HalfSpace>& rows() const { return rows_; }
  std::size_t dimension() const { return rows_.empty() ? 0 : rows_.front().normal.size(); }
  bool empty() const { return rows_.empty(); }

  bool operator==(const HalfPlanePredicate&) const = default;

 private:
  std::vector<HalfSpace> rows_;
};

/// Spherical-coordinate parametrization of a single row: w-1 angles give a
/// unit normal in R^w.
struct TrigRow {
  std::vector<double> angles;
  double offset = 0.0;
};
using TrigParams = std::vector<TrigRow>;

HalfPlanePredicate trig_to_halfplane(const TrigParams& params);

/// min_k (a_k . x - b_k). Throws GeometryError on a dimension mismatch.
double predicate_robustness(const HalfPlanePredicate& predicate, std::span<const double> x);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double diagonal() const;
  bool operator==(const Box&) const = default;
};

/// Convex polygon, vertices counter-clockwise. Degenerate (point / segment)
/// polygons are allowed; an empty vertex list denotes the empty set.
struct Polygon {
  std::vector<Point2> vertices;

  bool empty() const { return vertices.empty(); }
  std::size_t size() const { return vertices.size(); }
};

/// Validates convexity and orientation; reorders a clockwise list to CCW.
Polygon make_convex_polygon(std::vector<Point2> vertices);

Polygon box_polygon(const Box& box);

/// The closure of the predicate's satisfying set intersected with `bbox`.
/// Only planar predicates are supported.
Polygon enumerate_vertices(const HalfPlanePredicate& predicate, const Box& bbox);

/// Euclidean distance from `point` to the polygon (0 inside or on the boundary).
double point_polygon_distance(Point2 point, const Polygon& polygon);

/// Symmetric Hausdorff distance between two convex polygons.
double hausdorff(const Polygon& a, const Polygon& b);

/// Half-plane description (one row per edge) of a non-degenerate convex polygon.
HalfPlanePredicate polygon_to_predicate(const Polygon& polygon);

}  // namespace censtl::geometry
