#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "censtl/census.hpp"
#include "censtl/config.hpp"
#include "censtl/infer_outer.hpp"
#include "censtl/partition.hpp"
#include "censtl/stl.hpp"
#include "censtl/trajdata.hpp"

namespace censtl::testing {

// Eight agents, eight points: one of {1,2,3,4} and two of {5,6,7,8} satisfied at every point.
inline std::vector<std::vector<int>> complementary_pattern() {
  return {{1, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 1, 0, 0, 1}, {0, 1, 0, 0, 0, 1, 1, 0}, {0, 0, 1, 0, 0, 0, 0, 0},
          {1, 0, 0, 1, 1, 0, 1, 0}, {0, 1, 1, 1, 1, 1, 1, 0}, {1, 1, 0, 0, 0, 1, 0, 1}, {0, 0, 1, 0, 0, 0, 0, 1}};
}

inline census::SignatureMatrix two_crew_matrix() { return census::SignatureMatrix::from_rows(two_crew_pattern()); }
inline census::SignatureMatrix complementary_matrix() {
  return census::SignatureMatrix::from_rows(complementary_pattern());
}

/// 1-based agent numbers to matrix indices.
inline census::AgentSet agents(std::initializer_list<std::size_t> ids) {
  census::AgentSet out;
  for (auto id : ids) out.push_back(id - 1);
  return out;
}

inline partition::PartitionConfig similarity_config() {
  partition::PartitionConfig c;
  c.relationship = partition::Relationship::Similarity;
  return c;
}

inline partition::PartitionConfig complementarity_config() {
  partition::PartitionConfig c;
  c.relationship = partition::Relationship::Complementarity;
  return c;
}

/// Single-session census signal of the given 1-based subgroups.
inline stl::CountSignal census_signal(const census::SignatureMatrix& sig,
                                      const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::string> names;
  std::vector<census::CensusTrajectory> censuses;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    names.push_back("S" + std::to_string(i + 1));
    census::AgentSet set;
    for (auto id : groups[i]) set.push_back(id - 1);
    censuses.push_back(census::census(sig, set));
  }
  return census::count_signal(sig, names, censuses, 0);
}

inline std::vector<outer::Subgroup> subgroups_of(const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<outer::Subgroup> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    out.push_back({"S" + std::to_string(i + 1), static_cast<int>(groups[i].size())});
  }
  return out;
}

inline const std::vector<std::vector<std::size_t>>& two_crews() {
  static const std::vector<std::vector<std::size_t>> g{{1, 2, 3}, {4, 5, 6}};
  return g;
}

inline const std::vector<std::vector<std::size_t>>& complementary_groups() {
  static const std::vector<std::vector<std::size_t>> g{{1, 2, 3, 4}, {5, 6, 7, 8}};
  return g;
}

/// Furniture data: the two-crew pattern in blocks of `block` samples starting at `offset`.
inline FurnitureScenario furniture(std::size_t sessions, std::size_t block = 40, std::size_t offset = 20,
                                   double noise = 0.0, std::uint64_t seed = 0) {
  FurnitureOptions o;
  o.num_sessions = sessions;
  o.noise = noise;
  o.seed = seed;
  o.schedule = block_schedule(two_crew_pattern(), block, offset, (o.num_points - offset) / block);
  return generate_furniture_dataset(o);
}

/// The ground-truth sequential formula F[-12,0](G[0,1) p0 & F[1,12) p1) with the generator regions.
inline stl::InnerFormula furniture_truth(const FurnitureScenario& s) {
  using F = stl::InnerFormula;
  const auto p0 = F::atom({"", geometry::polygon_to_predicate(s.region1)});
  const auto p1 = F::atom({"", geometry::polygon_to_predicate(s.region2)});
  const auto body = F::conj(F::always(stl::Interval::closed_open(0, 1), p0),
                            F::eventually(stl::Interval::closed_open(1, 12), p1));
  return F::eventually(stl::Interval::closed(-12, 0), body);
}

/// Pipeline configuration matching configs/furniture.ini, with data and output paths set.
inline PipelineConfig furniture_config(const std::filesystem::path& data, const std::filesystem::path& out) {
  PipelineConfig c = config_from_overrides({
      {"data.train", data.string()},
      {"inner.template", "seq(p0,p1)"},
      {"inner.lambda1", "1"},
      {"inner.lambda2", "100"},
      {"inner.tau_limit", "12"},
      {"inner.bbox", "0,0,200,20"},
      {"regions.p0", "2 6, 8 6, 8 14, 2 14"},
      {"regions.p1", "192 6, 198 6, 198 14, 192 14"},
      {"outer.lambda1", "0.001"},
      {"outer.lambda2", "1"},
      {"run.output", out.string()},
  });
  return c;
}

/// Fresh empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("censtl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace censtl::testing
