// Prints one PASS/FAIL line per acceptance criterion; non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "censtl/census.hpp"
#include "censtl/geometry.hpp"
#include "censtl/infer_outer.hpp"
#include "censtl/partition.hpp"
#include "censtl/pipeline.hpp"
#include "censtl/stl.hpp"
#include "support/fixtures.hpp"
#include "support/stl_oracle.hpp"

namespace {

using namespace censtl;
namespace fs = std::filesystem;
using testing::agents;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome semantics_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto r = testing::check_soundness(1000, 2024);
  const double t = seconds_since(start);
  o.require(r.pairs == 1000, "pairs " + std::to_string(r.pairs));
  o.require(r.violations == 0, std::to_string(r.violations) + " violations");
  o.require(t < 30.0, "runtime " + std::to_string(t) + " s");
  o.detail = o.pass ? std::to_string(r.points) + " points checked" : o.detail;
  return o;
}

Outcome time_domains() {
  using F = stl::InnerFormula;
  using stl::Interval;
  Outcome o;
  const auto above = [](double b) { return F::atom({"", geometry::HalfPlanePredicate({{{1.0}, b}})}); };
  const TimeGrid grid{0.0, 1.0, 201};
  const auto check = [&](const F& f, long lo, long hi, const std::string& name) {
    const auto d = stl::time_domain(f, grid);
    o.require(!d.empty() && d.first == lo && d.last == hi,
              name + " -> [" + std::to_string(d.first) + "," + std::to_string(d.last) + "]");
  };
  check(F::eventually(Interval::closed_open(0, 10), above(5)), 0, 190, "forward");
  check(F::eventually(Interval::closed_open(-10, 0), above(5)), 10, 200, "past");
  check(F::conj(F::eventually(Interval::closed_open(0, 10), above(5)),
                F::eventually(Interval::closed_open(20, 40), F::always(Interval::closed_open(20, 60), above(20)))),
        0, 100, "nested");
  return o;
}

Outcome two_crew_checks() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto sig = testing::two_crew_matrix();
  std::vector<double> supports;
  for (std::size_t a = 0; a < sig.num_agents(); ++a) supports.push_back(census::support(sig, {a}));
  o.require(supports == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.125, 0.125}, "supports");
  o.require(partition::frequent_agents(sig, 0.2) == agents({1, 2, 3, 4, 5, 6}), "frequent agents");

  const auto h = partition::build_hypergraph(sig, testing::similarity_config());
  const auto two = partition::min_cut_partition(h, 2);
  o.require(two.subgroups == std::vector<census::AgentSet>{agents({1, 2, 3}), agents({4, 5, 6})}, "2-way parts");
  o.require(two.fitness == std::vector<double>{1.0, 1.0}, "2-way fitness");

  auto three = partition::min_cut_partition(h, 3).fitness;
  std::sort(three.begin(), three.end());
  o.require(three == std::vector<double>{0.0, 0.25, 1.0}, "3-way fitness");

  const auto chosen = partition::select_num_subgroups(h, testing::similarity_config());
  o.require(chosen.subgroups.size() == 2, "selected " + std::to_string(chosen.subgroups.size()));
  const double t = seconds_since(start);
  o.require(t < 1.0, "runtime " + std::to_string(t) + " s");
  return o;
}

Outcome complementary_checks() {
  Outcome o;
  const auto sig = testing::complementary_matrix();
  o.require(census::count_variance(sig, agents({1, 2, 3, 4})) == 0.0, "variance {1,2,3,4}");
  o.require(census::count_variance(sig, agents({5, 6, 7, 8})) == 0.0, "variance {5,6,7,8}");

  const auto h = partition::build_hypergraph(sig, testing::complementarity_config());
  const std::vector<census::AgentSet> expected{agents({1, 2, 3, 4}), agents({5, 6, 7, 8})};

  // Independent scan of the 35 balanced bipartitions that keep agent 1 on the first side.
  std::size_t scanned = 0;
  double best = -1.0;
  census::AgentSet best_first;
  for (unsigned mask = 0; mask < 256; ++mask) {
    if (!(mask & 1u) || __builtin_popcount(mask) != 4) continue;
    census::AgentSet a;
    census::AgentSet b;
    for (std::size_t v = 0; v < 8; ++v) ((mask >> v) & 1u ? a : b).push_back(v);
    ++scanned;
    const double m = std::min(partition::fitness(a, h), partition::fitness(b, h));
    if (m > best) {
      best = m;
      best_first = a;
    }
  }
  o.require(scanned == 35, "scanned " + std::to_string(scanned));
  o.require(best_first == expected[0], "scan optimum");
  o.require(partition::brute_force_best_partition(h, 2, true).subgroups == expected, "brute force");
  o.require(partition::min_cut_partition(h, 2).subgroups == expected, "min cut");
  const auto chosen = partition::select_num_subgroups(h, testing::complementarity_config());
  o.require(chosen.subgroups.size() == 2, "selected " + std::to_string(chosen.subgroups.size()));
  return o;
}

Outcome outer_accuracy() {
  using namespace outer;
  Outcome o;
  const std::vector<stl::CountSignal> crews{testing::census_signal(testing::two_crew_matrix(), testing::two_crews())};
  const auto similar = instantiate_outer({OuterTemplateKind::DurDur, {2, 2, 4}},
                                         RelationshipAtoms::similarity("S1", 2, "S2", 2), 8);
  const auto a = accuracy(similar.cause, similar.effect, crews);
  o.require(a.p == 1.0 && a.m_c > 0, "similarity formula p=" + std::to_string(a.p));

  const std::vector<stl::CountSignal> comp{
      testing::census_signal(testing::complementary_matrix(), testing::complementary_groups())};
  const std::vector<CountBound> bounds{{"S1", 0, 2}, {"S2", 1, 3}};
  const auto complementary =
      instantiate_outer({OuterTemplateKind::InstDur, {0, 2}}, RelationshipAtoms::complementarity(bounds, bounds), 8);
  const auto b = accuracy(complementary.cause, complementary.effect, comp);
  o.require(b.p == 1.0 && b.m_c > 0, "complementarity formula p=" + std::to_string(b.p));

  const auto never = instantiate_outer({OuterTemplateKind::DurDur, {2, 2, 4}},
                                       RelationshipAtoms::similarity("S1", 3, "S2", 0), 8);
  const auto n = accuracy(never.cause, never.effect, crews);
  o.require(n.m_c == 0 && n.p == -1.0, "cause never holds");
  const auto once = instantiate_outer({OuterTemplateKind::DurDur, {2, 2, 4}},
                                      RelationshipAtoms::similarity("S1", 2, "S2", 3), 8);
  const auto m = accuracy(once.cause, once.effect, crews);
  o.require(m.m_c > 0 && m.p == 0.0, "cause holds, effect never");
  return o;
}

Outcome exhaustive_vs_pso() {
  using namespace outer;
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    std::string name;
    std::vector<stl::CountSignal> census;
    std::vector<Subgroup> groups;
    Relationship relationship;
    std::pair<std::size_t, std::size_t> pair;
    double lambda1;
    double lambda2;
  };
  const std::vector<Case> cases{
      {"two-crew", {testing::census_signal(testing::two_crew_matrix(), testing::two_crews())},
       testing::subgroups_of(testing::two_crews()), Relationship::Similarity, {0, 1}, 1.0, 10.0},
      {"complementary",
       {testing::census_signal(testing::complementary_matrix(), testing::complementary_groups())},
       testing::subgroups_of(testing::complementary_groups()), Relationship::Complementarity, {0, 0}, 1.0, 0.01},
  };
  for (const auto& c : cases) {
    for (auto kind : {OuterTemplateKind::DurDur, OuterTemplateKind::InstDur}) {
      OuterConfig cfg;
      cfg.lambda1 = c.lambda1;
      cfg.lambda2 = c.lambda2;
      cfg.pso.num_particles = 200;
      cfg.pso.num_iterations = 100;
      const auto exact = enumerate_outer(c.census, c.groups, c.relationship, kind, c.pair, cfg);
      int hits = 0;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.pso.seed = seed;
        const auto found = search_outer(c.census, c.groups, c.relationship, kind, c.pair, cfg);
        hits += found.objective == exact.objective;
      }
      o.require(hits >= 4, c.name + " " + std::string(template_name(kind)) + " " + std::to_string(hits) + "/5");
    }
  }
  const double t = seconds_since(start);
  o.require(t < 60.0, "runtime " + std::to_string(t) + " s");
  return o;
}

Outcome furniture_pipeline() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto dir = testing::scratch_dir("acceptance_furniture");
  const auto scenario = testing::furniture(10);
  {
    std::ofstream out(dir / "furniture.csv");
    save_dataset(scenario.dataset, out);
  }
  const auto cfg = testing::furniture_config(dir / "furniture.csv", dir / "out");
  const auto data = load_data(cfg);
  o.require(data.validation.has_value() && data.validation->num_sessions() == 3, "70/30 split");
  if (!o.pass) return o;

  const auto inner = run_inner_stage(cfg, data.train);
  const double h1 = inner::region_distance(scenario.region1, inner.best.predicates.at(0), cfg.inner.bbox);
  const double h2 = inner::region_distance(scenario.region2, inner.best.predicates.at(1), cfg.inner.bbox);
  o.require(h1 <= 1.0 && h2 <= 1.0, "Hausdorff " + std::to_string(h1) + ", " + std::to_string(h2));

  const auto sig = census::signatures(inner.best.phi, data.train);
  const auto vsig = census::signatures(inner.best.phi, *data.validation);
  const auto stage = run_partition_stage(cfg, sig, partition::Relationship::Similarity);
  const auto train = census_signals(sig, stage);
  const auto valid = census_signals(vsig, stage);
  const auto outer = run_outer_stage(cfg, stage, train, &valid);
  o.require(!outer.candidates.empty(), "no outer candidate");
  if (!outer.candidates.empty()) {
    const auto& best = outer.candidates.front();
    const auto& v = outer.validation.front();
    o.require(best.acc.p == 1.0, "p=" + std::to_string(best.acc.p));
    o.require(v.has_value() && v->p == 1.0, "p_v=" + (v ? std::to_string(v->p) : std::string("none")));
    if (o.pass) o.detail = stl::format_formula(best.instance.gamma);
  }
  const double t = seconds_since(start);
  o.require(t < 600.0, "runtime " + std::to_string(t) + " s");
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = testing::scratch_dir("acceptance_determinism");
  {
    std::ofstream out(dir / "d.csv");
    save_dataset(testing::furniture(4).dataset, out);
  }
  const auto run = [&](const std::string& name) {
    auto cfg = testing::furniture_config(dir / "d.csv", dir / name);
    cfg.inner.pso.num_particles = 60;
    cfg.inner.pso.num_iterations = 30;
    cfg.outer.pso.num_particles = 40;
    cfg.outer.pso.num_iterations = 20;
    std::ostringstream log;
    run_pipeline_or_throw(cfg, log);
  };
  run("a");
  run("b");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    const auto other = dir / "b" / entry.path().filename();
    o.require(fs::exists(other) && slurp(entry.path()) == slurp(other), entry.path().filename().string());
  }
  std::size_t other_files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir / "b")) ++other_files;
  o.require(files > 0 && files == other_files, "file count");
  if (o.pass) o.detail = std::to_string(files) + " reports identical";
  return o;
}

geometry::Polygon random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-5.0, 5.0);
  std::uniform_real_distribution<double> radius(0.5, 3.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
  const double cx = centre(rng);
  const double cy = centre(rng);
  const double r = radius(rng);
  std::vector<double> angles(3 + rng() % 6);
  for (auto& a : angles) a = angle(rng);
  std::sort(angles.begin(), angles.end());
  std::vector<geometry::Point2> pts;
  for (double a : angles) pts.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  return geometry::make_convex_polygon(pts);
}

Outcome hausdorff_suite() {
  using geometry::box_polygon;
  using geometry::hausdorff;
  Outcome o;
  const auto unit = box_polygon({0, 0, 1, 1});
  o.require(hausdorff(unit, unit) == 0.0, "identity");
  o.require(hausdorff(unit, box_polygon({2, 0, 3, 1})) == 2.0, "disjoint");
  o.require(std::abs(hausdorff(unit, box_polygon({0, 0, 2, 2})) - std::sqrt(2.0)) <= 1e-12, "nested");
  std::mt19937_64 rng(9);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_convex(rng);
    const auto b = random_convex(rng);
    const auto c = random_convex(rng);
    bad += std::abs(hausdorff(a, b) - hausdorff(b, a)) > 1e-9;
    bad += hausdorff(a, c) > hausdorff(a, b) + hausdorff(b, c) + 1e-9;
    bad += hausdorff(a, a) > 1e-9;
  }
  o.require(bad == 0, std::to_string(bad) + " metric violations");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"robustness sign agrees with the Boolean oracle", semantics_oracle},
      {"time domains of the three example formulas", time_domains},
      {"two-crew pattern supports, partitions and selection", two_crew_checks},
      {"complementary pattern variance, partition and selection", complementary_checks},
      {"outer formula accuracy and the -1 convention", outer_accuracy},
      {"PSO outer search matches exhaustive enumeration", exhaustive_vs_pso},
      {"furniture pipeline end to end", furniture_pipeline},
      {"same seed gives identical reports", determinism},
      {"Hausdorff distance suite", hausdorff_suite},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::ostringstream line;
    line << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " - " << criteria[i].first << " ("
         << std::fixed;
    line.precision(2);
    line << seconds_since(start) << " s)";
    if (!o.detail.empty()) line << ": " << o.detail;
    std::cout << line.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
