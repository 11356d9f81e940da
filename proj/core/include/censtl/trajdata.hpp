#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "censtl/geometry.hpp"

namespace censtl {

/// Malformed or inconsistent trajectory data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform sampling grid: point(i) = start + i * step.
struct TimeGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t num_points = 0;

  double point(std::size_t i) const { return start + static_cast<double>(i) * step; }
  bool operator==(const TimeGrid&) const = default;
};

/// One agent's observations during one session, row-major (num_points x dimension).
class Trajectory {
 public:
  Trajectory(std::string agent_id, std::string session_id, TimeGrid grid, std::size_t dimension,
             std::vector<double> values);

  const std::string& agent_id() const { return agent_id_; }
  const std::string& session_id() const { return session_id_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return grid_.num_points; }

  std::span<const double> sample(std::size_t i) const {
    return {values_.data() + i * dimension_, dimension_};
  }
  std::span<const double> values() const { return values_; }

 private:
  std::string agent_id_;
  std::string session_id_;
  TimeGrid grid_;
  std::size_t dimension_;
  std::vector<double> values_;
};

/// Every (agent, session) trajectory on a per-session shared grid. Immutable.
class Dataset {
 public:
  /// `trajectories` is session-major: index = session * num_agents + agent.
  Dataset(std::vector<std::string> agents, std::vector<std::string> sessions,
          std::vector<Trajectory> trajectories);

  std::size_t num_agents() const { return agents_.size(); }
  std::size_t num_sessions() const { return sessions_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::vector<std::string>& sessions() const { return sessions_; }

  const Trajectory& trajectory(std::size_t agent, std::size_t session) const {
    return trajectories_[session * agents_.size() + agent];
  }
  const TimeGrid& grid(std::size_t session) const { return trajectory(0, session).grid(); }

  std::optional<std::size_t> agent_index(std::string_view id) const;
  std::optional<std::size_t> session_index(std::string_view id) const;

  /// Sub-dataset over the listed sessions (in the given order).
  Dataset select_sessions(std::span<const std::size_t> sessions) const;

 private:
  std::vector<std::string> agents_;
  std::vector<std::string> sessions_;
  std::vector<Trajectory> trajectories_;
  std::size_t dimension_ = 0;
};

/// Column mapping for CSV input. Empty `value_columns` means "every column
/// after the three key columns, in file order".
struct CsvSchema {
  std::string session_column = "session_id";
  std::string agent_column = "agent_id";
  std::string time_column = "t";
  std::vector<std::string> value_columns;
};

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset parse_dataset(std::istream& in, const CsvSchema& schema = {},
                      std::string_view source = "<stream>");

/// Canonical CSV: header `session_id,agent_id,t,x1..xw`, rows ordered by
/// (session, agent, time), shortest round-trip number formatting.
void save_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Synthetic furniture-moving scenario ----------------------------------------

/// Half-open range of sample indices [begin, end).
struct TaskInterval {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Trip timing in samples: dwell at home, travel, dwell at the target, travel back.
struct FurnitureTiming {
  std::size_t dwell_home = 3;
  std::size_t travel = 2;
  std::size_t dwell_away = 3;

  std::size_t cycle() const { return dwell_home + 2 * travel + dwell_away; }
};

struct FurnitureLayout {
  geometry::Box room{0.0, 0.0, 200.0, 20.0};
  geometry::Polygon region1 = geometry::box_polygon({2.0, 6.0, 8.0, 14.0});
  geometry::Polygon region2 = geometry::box_polygon({192.0, 6.0, 198.0, 14.0});
};

struct FurnitureOptions {
  std::size_t num_agents = 8;
  std::size_t num_points = 400;
  std::size_t num_sessions = 1;
  double step = 1.0;
  /// Per-agent task intervals, applied identically in every session.
  std::vector<std::vector<TaskInterval>> schedule;
  double noise = 0.0;
  std::uint64_t seed = 0;
  FurnitureTiming timing;
  FurnitureLayout layout;
};

struct FurnitureScenario {
  Dataset dataset;
  geometry::Polygon region1;
  geometry::Polygon region2;
  geometry::Box room;
  FurnitureTiming timing;
};

/// Agents shuttle Region 1 -> Region 2 -> Region 1 in back-to-back trips
/// during scheduled intervals and idle at the Region 1 centre otherwise.
/// Deterministic for a fixed seed.
FurnitureScenario generate_furniture_dataset(const FurnitureOptions& options);

/// Convenience overload mirroring the single-session generator signature.
FurnitureScenario generate_furniture_dataset(std::size_t num_agents, std::size_t num_points,
                                             std::vector<std::vector<TaskInterval>> schedule,
                                             double noise, std::uint64_t seed);

/// Eight agents over eight blocks: two crews of three alternating in pairs of
/// blocks, plus two occasional helpers.
std::vector<std::vector<int>> two_crew_pattern();

/// Block schedule: agent k works during every block b with pattern[k][b] != 0;
/// block b covers [offset + b*block, offset + (b+1)*block), wrapping the
/// pattern columns when `num_blocks` exceeds them.
std::vector<std::vector<TaskInterval>> block_schedule(const std::vector<std::vector<int>>& pattern,
                                                      std::size_t block, std::size_t offset,
                                                      std::size_t num_blocks);

}  // namespace censtl
