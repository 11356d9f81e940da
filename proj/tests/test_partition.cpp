#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "censtl/partition.hpp"
#include "support/fixtures.hpp"

namespace censtl::partition {
namespace {

using testing::agents;

Hypergraph two_crew_graph() { return build_hypergraph(testing::two_crew_matrix(), testing::similarity_config()); }

Hypergraph complementary_graph() {
  return build_hypergraph(testing::complementary_matrix(), testing::complementarity_config());
}

double min_fitness(const PartitionResult& r) { return *std::min_element(r.fitness.begin(), r.fitness.end()); }

Hypergraph random_graph(std::mt19937_64& rng, std::size_t n) {
  Hypergraph h;
  for (std::size_t v = 0; v < n; ++v) {
    h.vertices.push_back(v);
    h.labels.push_back(std::to_string(v + 1));
  }
  const std::size_t m = 1 + rng() % (3 * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::set<std::size_t> e;
    const std::size_t size = 2 + rng() % 3;
    while (e.size() < std::min(size, n)) e.insert(rng() % n);
    h.edges.push_back({AgentSet(e.begin(), e.end()), 0.1 + static_cast<double>(rng() % 100) / 10.0});
  }
  return h;
}

void expect_partition_of(const PartitionResult& r, const AgentSet& vertices) {
  AgentSet all;
  for (const auto& part : r.subgroups) {
    EXPECT_FALSE(part.empty());
    EXPECT_TRUE(std::is_sorted(part.begin(), part.end()));
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, vertices);
  EXPECT_EQ(r.fitness.size(), r.subgroups.size());
}

TEST(FrequentAgents, Thresholds) {
  const auto sig = testing::two_crew_matrix();
  EXPECT_EQ(frequent_agents(sig, 0.2), agents({1, 2, 3, 4, 5, 6}));
  EXPECT_TRUE(frequent_agents(sig, 0.6).empty());
  EXPECT_EQ(frequent_agents(sig, 0.1), agents({1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_THROW(frequent_agents(sig, 0.0), PartitionError);
}

TEST(Apriori, CrewItemsets) {
  const auto sig = testing::two_crew_matrix();
  const auto sets = apriori_itemsets(sig, frequent_agents(sig, 0.2), 0.2);
  std::set<AgentSet> found;
  for (const auto& [set, sup] : sets) {
    EXPECT_DOUBLE_EQ(sup, 0.5);
    found.insert(set);
  }
  const std::set<AgentSet> expected{agents({1, 2}), agents({1, 3}), agents({2, 3}), agents({1, 2, 3}),
                                    agents({4, 5}), agents({4, 6}), agents({5, 6}), agents({4, 5, 6})};
  EXPECT_EQ(found, expected);
}

TEST(Hypergraph, Similarity) {
  const auto h = two_crew_graph();
  EXPECT_EQ(h.vertices, agents({1, 2, 3, 4, 5, 6}));
  ASSERT_EQ(h.edges.size(), 8u);
  for (const auto& e : h.edges) {
    EXPECT_GE(e.vertices.size(), 2u);
    EXPECT_DOUBLE_EQ(e.weight, 0.5);
  }
  std::ostringstream out;
  write_hypergraph(h, out);
  EXPECT_NE(out.str().find("1,2,3:0.5"), std::string::npos) << out.str();
}

TEST(Hypergraph, Complementarity) {
  const auto h = complementary_graph();
  EXPECT_EQ(h.vertices.size(), 8u);
  // C(8,2) + C(8,3) + C(8,4)
  EXPECT_EQ(h.edges.size(), 28u + 56u + 70u);
  const auto weight_of = [&](const AgentSet& s) {
    for (const auto& e : h.edges) {
      if (e.vertices == s) return e.weight;
    }
    return -1.0;
  };
  EXPECT_DOUBLE_EQ(weight_of(agents({1, 2, 3, 4})), 1e7);
  EXPECT_DOUBLE_EQ(weight_of(agents({5, 6, 7, 8})), 1e7);
  EXPECT_DOUBLE_EQ(weight_of(agents({5, 6})), 1.0 / (0.4375 + 1e-7));
}

TEST(Fitness, Examples) {
  const auto h = two_crew_graph();
  EXPECT_DOUBLE_EQ(fitness(agents({1, 2, 3}), h), 1.0);
  EXPECT_DOUBLE_EQ(fitness(agents({4, 5, 6}), h), 1.0);
  EXPECT_DOUBLE_EQ(fitness(agents({1, 4}), h), 0.0);
  EXPECT_DOUBLE_EQ(fitness(agents({1, 2}), h), 0.25);
  EXPECT_DOUBLE_EQ(fitness(agents({7}), h), 0.0);
  EXPECT_DOUBLE_EQ(cut_weight({agents({1, 2, 3}), agents({4, 5, 6})}, h), 0.0);
  EXPECT_DOUBLE_EQ(cut_weight({agents({1, 2, 4}), agents({3, 5, 6})}, h), 3.0);
}

TEST(MinCut, TwoCrews) {
  const auto r = min_cut_partition(two_crew_graph(), 2);
  EXPECT_EQ(r.subgroups, (std::vector<AgentSet>{agents({1, 2, 3}), agents({4, 5, 6})}));
  EXPECT_EQ(r.fitness, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(r.cut, 0.0);
  EXPECT_THROW(min_cut_partition(two_crew_graph(), 1), PartitionError);
  EXPECT_THROW(min_cut_partition(two_crew_graph(), 7), PartitionError);
}

TEST(MinCut, ThreeWayTwoCrews) {
  auto r = min_cut_partition(two_crew_graph(), 3);
  ASSERT_EQ(r.subgroups.size(), 3u);
  std::sort(r.fitness.begin(), r.fitness.end());
  EXPECT_EQ(r.fitness, (std::vector<double>{0.0, 0.25, 1.0}));
}

TEST(MinCut, Complementary) {
  const auto r = min_cut_partition(complementary_graph(), 2);
  EXPECT_EQ(r.subgroups, (std::vector<AgentSet>{agents({1, 2, 3, 4}), agents({5, 6, 7, 8})}));
}

TEST(Select, TwoSubgroupsForBothPatterns) {
  const auto sim = select_num_subgroups(two_crew_graph(), testing::similarity_config());
  EXPECT_EQ(sim.subgroups, (std::vector<AgentSet>{agents({1, 2, 3}), agents({4, 5, 6})}));
  EXPECT_EQ(sim.excluded, agents({7, 8}));
  const auto comp = select_num_subgroups(complementary_graph(), testing::complementarity_config());
  EXPECT_EQ(comp.subgroups, (std::vector<AgentSet>{agents({1, 2, 3, 4}), agents({5, 6, 7, 8})}));
  for (double f : comp.fitness) EXPECT_GT(f, 0.2);
}

TEST(Select, FallsBackToWholeSet) {
  Hypergraph h;
  h.vertices = {0, 1, 2};
  h.labels = {"a", "b", "c"};
  const auto r = select_num_subgroups(h, PartitionConfig{});
  ASSERT_EQ(r.subgroups.size(), 1u);
  EXPECT_EQ(r.subgroups[0], h.vertices);
  EXPECT_TRUE(select_num_subgroups(Hypergraph{}, PartitionConfig{}).subgroups.empty());
}

TEST(BruteForce, Examples) {
  const auto r = brute_force_best_partition(two_crew_graph(), 2);
  EXPECT_EQ(r.subgroups, (std::vector<AgentSet>{agents({1, 2, 3}), agents({4, 5, 6})}));
  const auto singles = brute_force_best_partition(two_crew_graph(), 6);
  EXPECT_EQ(singles.subgroups.size(), 6u);
  for (double f : singles.fitness) EXPECT_EQ(f, 0.0);
  const auto balanced = brute_force_best_partition(complementary_graph(), 2, true);
  EXPECT_EQ(balanced.subgroups, (std::vector<AgentSet>{agents({1, 2, 3, 4}), agents({5, 6, 7, 8})}));
  Hypergraph big;
  for (std::size_t v = 0; v < 13; ++v) big.vertices.push_back(v);
  EXPECT_THROW(brute_force_best_partition(big, 2), PartitionError);
}

TEST(MinCut, NeverBeatsBruteForce) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 4 + rng() % 7;
    const auto h = random_graph(rng, n);
    const std::size_t k = 2 + rng() % 2;
    const auto heuristic = min_cut_partition(h, k);
    const auto exact = brute_force_best_partition(h, k);
    expect_partition_of(heuristic, h.vertices);
    expect_partition_of(exact, h.vertices);
    EXPECT_EQ(heuristic.subgroups.size(), k);
    EXPECT_LE(min_fitness(heuristic), min_fitness(exact) + 1e-12);
    EXPECT_DOUBLE_EQ(heuristic.cut, cut_weight(heuristic.subgroups, h));
    for (std::size_t j = 0; j < heuristic.subgroups.size(); ++j) {
      EXPECT_DOUBLE_EQ(heuristic.fitness[j], fitness(heuristic.subgroups[j], h));
      EXPECT_GE(heuristic.fitness[j], 0.0);
      EXPECT_LE(heuristic.fitness[j], 1.0);
    }
  }
}

TEST(MinCut, BalancedSizes) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 4 + rng() % 9;
    const auto h = random_graph(rng, n);
    const auto r = min_cut_partition(h, 2);
    const auto a = r.subgroups[0].size();
    const auto b = r.subgroups[1].size();
    EXPECT_LE(std::max(a, b) - std::min(a, b), 1u);
  }
}

TEST(Report, ListsSubgroups) {
  const auto h = two_crew_graph();
  std::ostringstream out;
  write_partition_report(select_num_subgroups(h, testing::similarity_config()), h.labels, out);
  EXPECT_NE(out.str().find('1'), std::string::npos);
}

}  // namespace
}  // namespace censtl::partition
