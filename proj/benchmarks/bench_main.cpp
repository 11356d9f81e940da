#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "censtl/census.hpp"
#include "censtl/infer_outer.hpp"
#include "censtl/partition.hpp"
#include "censtl/pso.hpp"
#include "censtl/stl.hpp"
#include "censtl/trajdata.hpp"

namespace {

using namespace censtl;

const FurnitureScenario& scenario() {
  static const FurnitureScenario s = [] {
    FurnitureOptions o;
    o.num_sessions = 1;
    return generate_furniture_dataset(o);
  }();
  return s;
}

void BM_RobustnessSeries(benchmark::State& state) {
  using F = stl::InnerFormula;
  const auto& s = scenario();
  const auto p0 = F::atom({"", geometry::polygon_to_predicate(s.region1)});
  const auto p1 = F::atom({"", geometry::polygon_to_predicate(s.region2)});
  const auto w = static_cast<double>(state.range(0));
  const auto phi = F::eventually(stl::Interval::closed(-w, 0),
                                 F::conj(F::always(stl::Interval::closed_open(0, 1), p0),
                                         F::eventually(stl::Interval::closed_open(1, w), p1)));
  const auto& x = s.dataset.trajectory(0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(stl::robustness_series(phi, x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.grid().num_points));
}
BENCHMARK(BM_RobustnessSeries)->Arg(4)->Arg(12)->Arg(48);

void BM_PsoRastrigin(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  pso::SearchSpace space;
  for (std::size_t i = 0; i < dim; ++i) space.add_continuous(-5.12, 5.12);
  const pso::CostFunction rastrigin = [](std::span<const double> x) {
    double f = 10.0 * static_cast<double>(x.size());
    for (double v : x) f += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return f;
  };
  pso::PSOConfig cfg;
  cfg.num_particles = 50;
  cfg.num_iterations = 100;
  for (auto _ : state) {
    cfg.seed++;
    benchmark::DoNotOptimize(pso::optimize(rastrigin, space, cfg).best_cost);
  }
}
BENCHMARK(BM_PsoRastrigin)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ComplementarityPartition(benchmark::State& state) {
  const std::vector<std::vector<int>> rows{
      {1, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 1, 0, 0, 1}, {0, 1, 0, 0, 0, 1, 1, 0}, {0, 0, 1, 0, 0, 0, 0, 0},
      {1, 0, 0, 1, 1, 0, 1, 0}, {0, 1, 1, 1, 1, 1, 1, 0}, {1, 1, 0, 0, 0, 1, 0, 1}, {0, 0, 1, 0, 0, 0, 0, 1}};
  const auto sig = census::SignatureMatrix::from_rows(rows);
  partition::PartitionConfig cfg;
  cfg.relationship = partition::Relationship::Complementarity;
  for (auto _ : state) {
    const auto h = partition::build_hypergraph(sig, cfg);
    benchmark::DoNotOptimize(partition::select_num_subgroups(h, cfg));
  }
}
BENCHMARK(BM_ComplementarityPartition)->Unit(benchmark::kMillisecond);

void BM_OuterEnumerate(benchmark::State& state) {
  const auto sig = census::SignatureMatrix::from_rows(two_crew_pattern());
  const std::vector<std::string> names{"S1", "S2"};
  const std::vector<census::CensusTrajectory> censuses{census::census(sig, {0, 1, 2}), census::census(sig, {3, 4, 5})};
  const std::vector<stl::CountSignal> signal{census::count_signal(sig, names, censuses, 0)};
  const std::vector<outer::Subgroup> groups{{"S1", 3}, {"S2", 3}};
  outer::OuterConfig cfg;
  cfg.lambda2 = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(outer::enumerate_outer(signal, groups, outer::Relationship::Similarity,
                                                    outer::OuterTemplateKind::DurDur, {0, 1}, cfg));
  }
}
BENCHMARK(BM_OuterEnumerate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
