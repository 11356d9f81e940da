#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "censtl/geometry.hpp"

namespace censtl::geometry {
namespace {

constexpr double kPi = std::numbers::pi;

HalfPlanePredicate unit_square_rows() {
  return HalfPlanePredicate({{{1, 0}, 0}, {{-1, 0}, -1}, {{0, 1}, 0}, {{0, -1}, -1}});
}

// Random convex polygon: sorted angles on an ellipse around a random centre.
Polygon random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 3 + static_cast<int>(u(rng) * 6);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (auto& a : angles) a = u(rng) * 2 * kPi;
  std::sort(angles.begin(), angles.end());
  const double cx = u(rng) * 20 - 10;
  const double cy = u(rng) * 20 - 10;
  const double rx = 0.5 + u(rng) * 5;
  const double ry = 0.5 + u(rng) * 5;
  std::vector<Point2> pts;
  for (double a : angles) pts.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  return make_convex_polygon(pts);
}

TEST(Trig, PlanarAxes) {
  const auto p = trig_to_halfplane({{{0.0}, 3.0}});
  EXPECT_DOUBLE_EQ(p.rows()[0].normal[0], 1.0);
  EXPECT_DOUBLE_EQ(p.rows()[0].normal[1], 0.0);
  EXPECT_DOUBLE_EQ(p.rows()[0].offset, 3.0);
  const auto q = trig_to_halfplane({{{kPi / 2}, 0.0}});
  EXPECT_NEAR(q.rows()[0].normal[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(q.rows()[0].normal[1], 1.0);
}

TEST(Trig, ThreeDimensionalNormal) {
  const auto p = trig_to_halfplane({{{kPi / 2, 0.0}, 0.0}});
  EXPECT_NEAR(p.rows()[0].normal[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.rows()[0].normal[1], 1.0);
  EXPECT_DOUBLE_EQ(p.rows()[0].normal[2], 0.0);
}

TEST(Trig, RowsHaveUnitNorm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    TrigRow row;
    const int w = 2 + i % 4;
    for (int j = 0; j + 1 < w; ++j) row.angles.push_back(angle(rng));
    const auto p = trig_to_halfplane({row});
    double n2 = 0.0;
    for (double a : p.rows()[0].normal) n2 += a * a;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-12);
  }
}

TEST(Predicate, RejectsNonUnitNormals) {
  EXPECT_THROW(HalfPlanePredicate({{{2, 0}, 0}}), GeometryError);
  EXPECT_THROW(HalfPlanePredicate(std::vector<HalfSpace>{}), GeometryError);
  const auto p = HalfPlanePredicate::normalized({{{3, 4}, 10}});
  EXPECT_DOUBLE_EQ(p.rows()[0].normal[0], 0.6);
  EXPECT_DOUBLE_EQ(p.rows()[0].offset, 2.0);
}

TEST(Predicate, RobustnessIsMinimumMargin) {
  const auto p = unit_square_rows();
  const std::vector<double> centre{0.5, 0.5};
  EXPECT_DOUBLE_EQ(predicate_robustness(p, centre), 0.5);
  const std::vector<double> face{1.0, 0.3};
  EXPECT_DOUBLE_EQ(predicate_robustness(p, face), 0.0);
  const std::vector<double> outside{3.0, 0.5};
  EXPECT_LE(predicate_robustness(p, outside), -2.0);
  const std::vector<double> wrong{1.0};
  EXPECT_THROW(predicate_robustness(p, wrong), GeometryError);
}

TEST(Vertices, UnitSquare) {
  const auto poly = enumerate_vertices(unit_square_rows(), {-10, -10, 10, 10});
  EXPECT_EQ(poly.size(), 4u);
}

TEST(Vertices, SingleHalfPlaneClippedToBox) {
  const auto poly = enumerate_vertices(HalfPlanePredicate({{{1, 0}, 0}}), {0, 0, 105, 68});
  ASSERT_EQ(poly.size(), 4u);
  std::vector<Point2> expected{{0, 0}, {105, 0}, {105, 68}, {0, 68}};
  for (const auto& e : expected) {
    EXPECT_TRUE(std::any_of(poly.vertices.begin(), poly.vertices.end(),
                            [&](const Point2& v) { return std::hypot(v.x - e.x, v.y - e.y) < 1e-9; }));
  }
}

TEST(Vertices, InfeasibleIsEmpty) {
  const auto p = HalfPlanePredicate({{{1, 0}, 5}, {{-1, 0}, -3}});
  EXPECT_TRUE(enumerate_vertices(p, {-10, -10, 10, 10}).empty());
}

TEST(Vertices, PlanarOnly) {
  EXPECT_THROW(enumerate_vertices(HalfPlanePredicate({{{1, 0, 0}, 0}}), {0, 0, 1, 1}), GeometryError);
}

TEST(Vertices, SatisfyDefiningRows) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> offset(-8, 8);
  for (int i = 0; i < 500; ++i) {
    TrigParams params(4);
    for (auto& row : params) row = {{angle(rng)}, offset(rng)};
    const auto p = trig_to_halfplane(params);
    const auto poly = enumerate_vertices(p, {-10, -10, 10, 10});
    for (const auto& v : poly.vertices) {
      const std::vector<double> x{v.x, v.y};
      EXPECT_GE(predicate_robustness(p, x), -1e-9);
      EXPECT_GE(v.x, -10 - 1e-9);
      EXPECT_LE(v.y, 10 + 1e-9);
    }
  }
}

TEST(Distance, Cases) {
  const auto unit = box_polygon({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(point_polygon_distance({0.5, 0.5}, unit), 0.0);
  EXPECT_DOUBLE_EQ(point_polygon_distance({0, 0}, box_polygon({2, 0, 3, 1})), 2.0);
  EXPECT_DOUBLE_EQ(point_polygon_distance({3, 2}, unit), std::sqrt(5.0));
  EXPECT_THROW(point_polygon_distance({0, 0}, Polygon{}), GeometryError);
}

TEST(Distance, DegeneratePolygons) {
  EXPECT_DOUBLE_EQ(point_polygon_distance({3, 4}, Polygon{{{0, 0}}}), 5.0);
  EXPECT_DOUBLE_EQ(point_polygon_distance({1, 2}, Polygon{{{0, 0}, {2, 0}}}), 2.0);
}

TEST(Hausdorff, KnownValues) {
  const auto unit = box_polygon({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(hausdorff(unit, unit), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff(unit, box_polygon({2, 0, 3, 1})), 2.0);
  EXPECT_DOUBLE_EQ(hausdorff(unit, box_polygon({0, 0, 2, 2})), std::sqrt(2.0));
  EXPECT_THROW(hausdorff(unit, Polygon{}), GeometryError);
}

TEST(Hausdorff, MetricProperties) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_convex(rng);
    const auto b = random_convex(rng);
    const auto c = random_convex(rng);
    EXPECT_NEAR(hausdorff(a, b), hausdorff(b, a), 1e-9);
    EXPECT_LE(hausdorff(a, c), hausdorff(a, b) + hausdorff(b, c) + 1e-9);
    EXPECT_NEAR(hausdorff(a, a), 0.0, 1e-9);
  }
}

TEST(Polygons, OrientationAndConvexity) {
  const auto cw = make_convex_polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  double area = 0.0;
  for (std::size_t i = 0; i < cw.size(); ++i) {
    const auto& p = cw.vertices[i];
    const auto& q = cw.vertices[(i + 1) % cw.size()];
    area += p.x * q.y - q.x * p.y;
  }
  EXPECT_GT(area, 0.0);
  EXPECT_THROW(make_convex_polygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), GeometryError);
}

TEST(Polygons, PredicateRoundTrip) {
  const auto box = box_polygon({2, 6, 8, 14});
  const auto p = polygon_to_predicate(box);
  EXPECT_EQ(p.rows().size(), 4u);
  EXPECT_NEAR(hausdorff(enumerate_vertices(p, {0, 0, 200, 20}), box), 0.0, 1e-9);
}

}  // namespace
}  // namespace censtl::geometry
