#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "censtl/infer_inner.hpp"
#include "support/fixtures.hpp"

namespace censtl::inner {
namespace {

using stl::InnerFormula;
using stl::Interval;

geometry::HalfPlanePredicate box_predicate(double x0, double y0, double x1, double y1) {
  return geometry::polygon_to_predicate(geometry::box_polygon({x0, y0, x1, y1}));
}

InnerConfig furniture_inner(const FurnitureScenario& s) {
  InnerConfig c;
  c.lambda1 = 1;
  c.lambda2 = 100;
  c.tau_limit = 12;
  c.bbox = {0, 0, 200, 20};
  c.apriori = {s.region1, s.region2};
  return c;
}

Instantiated truth(const FurnitureScenario& s) {
  const std::vector<double> taus{1, 1, 12, 0};
  return instantiate(parse_template("seq(p0,p1)"), taus,
                     {geometry::polygon_to_predicate(s.region1), geometry::polygon_to_predicate(s.region2)});
}

TEST(Template, ParseAndFormat) {
  for (const char* text : {"seq(p0,p1)", "conc(p0,p1,p2)", "persist(p0)", "causal(p0,p1)", "seq(p0,conc(p1,p2))"}) {
    EXPECT_EQ(format_template(parse_template(text)), text);
  }
  EXPECT_EQ(predicate_slots(parse_template("seq(p0,p1,p2)")), 3u);
  EXPECT_EQ(temporal_param_count(parse_template("seq(p0,p1,p2)")), 7u);
  EXPECT_EQ(temporal_param_count(parse_template("persist(p0)")), 2u);
  EXPECT_TRUE(is_nested(parse_template("seq(p0,conc(p1,p2))")));
  EXPECT_FALSE(is_nested(parse_template("causal(p0,p1)")));
  EXPECT_THROW(parse_template("seq(p0)"), InnerError);
  EXPECT_THROW(parse_template("seq(p0,p1"), InnerError);
  EXPECT_THROW(predicate_slots(parse_template("seq(p0,p2)")), InnerError);
}

TEST(Instantiate, SequentialShapes) {
  const auto t = parse_template("seq(p0,p1)");
  const auto p = box_predicate(0, 0, 1, 1);
  const auto q = box_predicate(5, 5, 6, 6);
  const auto a0 = InnerFormula::atom({"", p});
  const auto a1 = InnerFormula::atom({"", q});

  const std::vector<double> full{2, 2, 10, 2};
  const auto f = instantiate(t, full, {p, q});
  EXPECT_EQ(f.phi_t, InnerFormula::conj(InnerFormula::always(Interval::closed_open(0, 2), a0),
                                        InnerFormula::eventually(Interval::closed_open(2, 10),
                                                                 InnerFormula::always(Interval::closed_open(0, 2), a1))));
  EXPECT_DOUBLE_EQ(f.length, 12.0);
  EXPECT_EQ(f.phi, InnerFormula::eventually(Interval::closed(-12, 0), f.phi_t));

  const std::vector<double> point{2, 3, 3, 4};
  EXPECT_EQ(instantiate(t, point, {p, q}).phi_t.child(1),
            InnerFormula::always(Interval::closed_open(3, 7), a1));
  const std::vector<double> event{2, 3, 9, 0};
  EXPECT_EQ(instantiate(t, event, {p, q}).phi_t.child(1),
            InnerFormula::eventually(Interval::closed_open(3, 9), a1));
}

TEST(Instantiate, Errors) {
  const auto t = parse_template("seq(p0,p1)");
  const auto p = box_predicate(0, 0, 1, 1);
  const auto bad = [&](std::vector<double> taus) { return instantiate(t, taus, {p, p}); };
  EXPECT_THROW(bad({0, 2, 4, 1}), InnerError);
  EXPECT_THROW(bad({3, 2, 4, 1}), InnerError);
  EXPECT_THROW(bad({2, 4, 3, 1}), InnerError);
  EXPECT_THROW(bad({2, 4, 4, 0}), InnerError);
  EXPECT_THROW(bad({2, 4, 5}), InnerError);
  EXPECT_THROW(bad({2, 4, 5, -1}), InnerError);
  EXPECT_THROW(instantiate(t, std::vector<double>{2, 2, 4, 1}, {p}), InnerError);
}

TEST(Instantiate, OtherTemplates) {
  const auto p = box_predicate(0, 0, 1, 1);
  EXPECT_DOUBLE_EQ(instantiate(parse_template("persist(p0)"), std::vector<double>{3, 4}, {p}).length, 7.0);
  EXPECT_DOUBLE_EQ(instantiate(parse_template("conc(p0,p1)"), std::vector<double>{5}, {p, p}).length, 5.0);
  EXPECT_THROW(instantiate(parse_template("causal(p0,p1)"), std::vector<double>{0}, {p, p}), InnerError);
}

TEST(Gaps, SequentialGapsAccumulate) {
  const auto t = parse_template("seq(p0,p1,p2)");
  EXPECT_EQ(gaps_to_taus(t, std::vector<double>{2, 0, 8, 2, 1, 0, 3}),
            (std::vector<double>{2, 2, 10, 2, 13, 13, 3}));
  EXPECT_EQ(gaps_to_taus(parse_template("persist(p0)"), std::vector<double>{3, 4}), (std::vector<double>{3, 4}));
}

TEST(SearchSpace, Layout) {
  InnerConfig c;
  c.bbox = {0, 0, 10, 10};
  const auto s = search_space(parse_template("seq(p0,p1)"), c, 2, 0.5);
  ASSERT_EQ(s.size(), 4u + 2u * 4u * 2u);
  EXPECT_EQ(s[0].kind, pso::DimensionKind::Grid);
  EXPECT_EQ(s[0].lower, 0.5);
  EXPECT_EQ(s[0].upper, 12.0);
  EXPECT_EQ(s[0].step, 0.5);
  EXPECT_EQ(s[4].kind, pso::DimensionKind::Continuous);
  EXPECT_THROW(search_space(parse_template("seq(p0,p1)"), c, 1, 1.0), InnerError);
}

TEST(Cost, ZeroForExactRegionsNobodyVisits) {
  std::ostringstream csv;
  csv << "session_id,agent_id,t,x1,x2\n";
  for (int k = 0; k < 3; ++k) {
    for (int t = 0; t < 30; ++t) csv << "s," << k << ',' << t << ",50,50\n";
  }
  std::istringstream in(csv.str());
  const auto data = parse_dataset(in);
  InnerConfig c;
  c.bbox = {0, 0, 100, 100};
  c.apriori = {geometry::box_polygon({0, 0, 10, 10}), geometry::box_polygon({80, 80, 90, 90})};
  const auto cand = instantiate(parse_template("seq(p0,p1)"), std::vector<double>{1, 1, 5, 0},
                                {box_predicate(0, 0, 10, 10), box_predicate(80, 80, 90, 90)});
  const auto cost = cost_jstl(cand, data, c);
  EXPECT_NEAR(cost.total, 0.0, 1e-9);
  EXPECT_EQ(cost.frequency, 0.0);
  EXPECT_EQ(cost.consistency, 0.0);
}

TEST(Cost, ComponentsAddUp) {
  const auto s = testing::furniture(2);
  auto c = furniture_inner(s);
  const auto gt = truth(s);
  const auto full = cost_jstl(gt, s.dataset, c);
  EXPECT_DOUBLE_EQ(full.total, full.consistency - full.frequency + 100 * full.specificity + full.penalty);
  c.lambda2 = 0;
  const auto bare = cost_jstl(gt, s.dataset, c);
  EXPECT_DOUBLE_EQ(bare.total, bare.consistency - bare.frequency);
  EXPECT_NEAR(full.specificity, 0.0, 1e-9);
}

TEST(Cost, LengthAndDomainPenalties) {
  const auto s = testing::furniture(1);
  auto c = furniture_inner(s);
  const auto p0 = geometry::polygon_to_predicate(s.region1);
  const auto p1 = geometry::polygon_to_predicate(s.region2);
  const auto longer = instantiate(parse_template("seq(p0,p1)"), std::vector<double>{1, 1, 14, 0}, {p0, p1});
  EXPECT_DOUBLE_EQ(cost_jstl(longer, s.dataset, c).penalty, 2 * kLengthPenalty);
  const auto huge = instantiate(parse_template("seq(p0,p1)"), std::vector<double>{1, 1, 300, 0}, {p0, p1});
  EXPECT_GE(cost_jstl(huge, s.dataset, c).penalty, kInfeasiblePenalty);
}

TEST(Cost, EmptyLearnedRegionScoresTwiceTheDiagonal) {
  const geometry::Box b{0, 0, 3, 4};
  const geometry::HalfPlanePredicate empty({{{1, 0}, 5}, {{-1, 0}, -4}});
  EXPECT_DOUBLE_EQ(region_distance(geometry::box_polygon(b), empty, b), 10.0);
}

TEST(Cost, GroundTruthBeatsRandomCandidates) {
  const auto s = testing::furniture(2);
  const auto c = furniture_inner(s);
  const auto t = parse_template("seq(p0,p1)");
  const double best = cost_jstl(truth(s), s.dataset, c).total;
  const auto space = search_space(t, c, 2, 1.0);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> alpha(space.size());
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      alpha[j] = std::uniform_real_distribution<double>(space[j].lower, space[j].upper)(rng);
    }
    space.snap(alpha);
    double cost = kInfeasiblePenalty;
    try {
      cost = cost_jstl(decode(t, alpha, c, 2), s.dataset, c).total;
    } catch (const InnerError&) {
    }
    EXPECT_LE(best, cost);
  }
}

class SmallSearch : public ::testing::Test {
 protected:
  static InnerResult run(double lambda2, std::uint64_t seed, double noise = 0.0) {
    const auto s = testing::furniture(2, 40, 20, noise, 8);
    auto c = furniture_inner(s);
    c.lambda2 = lambda2;
    c.pso.num_particles = 60;
    c.pso.num_iterations = 40;
    c.pso.seed = seed;
    return infer_inner(s.dataset, parse_template("seq(p0,p1)"), c);
  }
};

TEST_F(SmallSearch, Deterministic) {
  const auto a = run(100, 3);
  const auto b = run(100, 3);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.cost.total, b.cost.total);
  EXPECT_EQ(stl::format_formula(a.best.phi), stl::format_formula(b.best.phi));
}

TEST_F(SmallSearch, ReportedCostMatchesRecomputation) {
  static const auto s = testing::furniture(2);
  const auto r = run(100, 4);
  auto c = furniture_inner(s);
  EXPECT_DOUBLE_EQ(r.cost.total, cost_jstl(r.best, s.dataset, c).total);
  EXPECT_EQ(r.cost.total, r.search.best_cost);
  EXPECT_LE(r.best.length, c.tau_limit);
}

TEST_F(SmallSearch, HeavierSpecificityKeepsRegionsCloser) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    // Noisy positions make a slightly larger region pay off when it is cheap.
    const auto loose = run(1, seed, 2.0);
    const auto tight = run(100, seed, 2.0);
    EXPECT_LE(tight.cost.specificity, loose.cost.specificity) << "seed " << seed;
    EXPECT_GT(loose.cost.frequency, tight.cost.frequency) << "seed " << seed;
  }
}

TEST(InferInner, RejectsBadConfig) {
  const auto s = testing::furniture(1);
  auto c = furniture_inner(s);
  c.apriori.pop_back();
  EXPECT_THROW(infer_inner(s.dataset, parse_template("seq(p0,p1)"), c), InnerError);
  c = furniture_inner(s);
  c.warm_start = 1.5;
  EXPECT_THROW(infer_inner(s.dataset, parse_template("seq(p0,p1)"), c), InnerError);
  c = furniture_inner(s);
  c.apriori.push_back(s.region1);
  EXPECT_THROW(infer_inner(s.dataset, parse_template("seq(p0,conc(p1,p2))"), c), InnerError);
}

}  // namespace
}  // namespace censtl::inner
