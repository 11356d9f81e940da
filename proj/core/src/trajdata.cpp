#include "censtl/trajdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "censtl/format.hpp"

namespace censtl {

Trajectory::Trajectory(std::string agent_id, std::string session_id, TimeGrid grid,
                       std::size_t dimension, std::vector<double> values)
    : agent_id_(std::move(agent_id)),
      session_id_(std::move(session_id)),
      grid_(grid),
      dimension_(dimension),
      values_(std::move(values)) {
  if (grid_.num_points == 0) throw DataError("trajectory of agent " + agent_id_ + " is empty");
  if (!(grid_.step > 0.0)) throw DataError("time step must be positive");
  if (dimension_ == 0) throw DataError("observation dimension must be positive");
  if (values_.size() != grid_.num_points * dimension_) {
    throw DataError("trajectory of agent " + agent_id_ + " in session " + session_id_ +
                    " has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(grid_.num_points * dimension_));
  }
}

Dataset::Dataset(std::vector<std::string> agents, std::vector<std::string> sessions,
                 std::vector<Trajectory> trajectories)
    : agents_(std::move(agents)), sessions_(std::move(sessions)), trajectories_(std::move(trajectories)) {
  if (agents_.empty()) throw DataError("dataset has no agents");
  if (sessions_.empty()) throw DataError("dataset has no sessions");
  if (trajectories_.size() != agents_.size() * sessions_.size()) {
    throw DataError("dataset needs one trajectory per (agent, session) pair");
  }
  dimension_ = trajectories_.front().dimension();
  for (std::size_t q = 0; q < sessions_.size(); ++q) {
    const TimeGrid& reference = trajectory(0, q).grid();
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      const Trajectory& t = trajectory(k, q);
      if (t.agent_id() != agents_[k] || t.session_id() != sessions_[q]) {
        throw DataError("trajectory order does not match agent/session lists");
      }
      if (t.dimension() != dimension_) {
        throw DataError("agent " + agents_[k] + " has dimension " + std::to_string(t.dimension()) +
                        ", expected " + std::to_string(dimension_));
      }
      if (!(t.grid() == reference)) {
        throw DataError("agent " + agents_[k] + " in session " + sessions_[q] +
                        " is not aligned with the session time grid");
      }
    }
  }
}

std::optional<std::size_t> Dataset::agent_index(std::string_view id) const {
  const auto it = std::find(agents_.begin(), agents_.end(), id);
  if (it == agents_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - agents_.begin());
}

std::optional<std::size_t> Dataset::session_index(std::string_view id) const {
  const auto it = std::find(sessions_.begin(), sessions_.end(), id);
  if (it == sessions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - sessions_.begin());
}

Dataset Dataset::select_sessions(std::span<const std::size_t> sessions) const {
  std::vector<std::string> ids;
  std::vector<Trajectory> trajectories;
  for (const std::size_t q : sessions) {
    if (q >= sessions_.size()) throw DataError("session index out of range");
    ids.push_back(sessions_[q]);
    for (std::size_t k = 0; k < agents_.size(); ++k) trajectories.push_back(trajectory(k, q));
  }
  return Dataset(agents_, std::move(ids), std::move(trajectories));
}

// CSV --------------------------------------------------------------------------

namespace {

struct Row {
  double time;
  std::vector<double> values;
  std::size_t line;
};

std::string at_line(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

bool same_time(double a, double b, double step) {
  return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(step));
}

}  // namespace

Dataset parse_dataset(std::istream& in, const CsvSchema& schema, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t header_line = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    for (const auto field : split(text, ',')) header.emplace_back(trim(field));
    header_line = line_no;
    break;
  }
  if (header.empty()) throw DataError(std::string(source) + ": missing header row");

  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError(at_line(source, header_line) + "missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t session_col = column(schema.session_column);
  const std::size_t agent_col = column(schema.agent_column);
  const std::size_t time_col = column(schema.time_column);
  std::vector<std::size_t> value_cols;
  if (schema.value_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != session_col && c != agent_col && c != time_col) value_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.value_columns) value_cols.push_back(column(name));
  }
  if (value_cols.empty()) throw DataError(at_line(source, header_line) + "no observation columns");

  std::vector<std::string> sessions;
  std::vector<std::string> agents;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Row>> groups;

  auto intern = [](std::vector<std::string>& ids, std::string_view id) {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it != ids.end()) return static_cast<std::size_t>(it - ids.begin());
    ids.emplace_back(id);
    return ids.size() - 1;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, ',');
    if (fields.size() != header.size()) {
      throw DataError(at_line(source, line_no) + "row has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    const auto session_id = trim(fields[session_col]);
    const auto agent_id = trim(fields[agent_col]);
    if (session_id.empty() || agent_id.empty()) {
      throw DataError(at_line(source, line_no) + "empty session or agent id");
    }
    Row row{0.0, {}, line_no};
    if (!parse_double(fields[time_col], row.time) || !std::isfinite(row.time)) {
      throw DataError(at_line(source, line_no) + "invalid time value '" +
                      std::string(trim(fields[time_col])) + "'");
    }
    row.values.resize(value_cols.size());
    for (std::size_t c = 0; c < value_cols.size(); ++c) {
      if (!parse_double(fields[value_cols[c]], row.values[c]) || !std::isfinite(row.values[c])) {
        throw DataError(at_line(source, line_no) + "invalid value in column '" + header[value_cols[c]] + "'");
      }
    }
    const std::size_t q = intern(sessions, session_id);
    const std::size_t k = intern(agents, agent_id);
    groups[{q, k}].push_back(std::move(row));
  }
  if (groups.empty()) throw DataError(std::string(source) + ": no data rows");

  const std::size_t dimension = value_cols.size();
  std::vector<Trajectory> trajectories;
  trajectories.reserve(sessions.size() * agents.size());
  for (std::size_t q = 0; q < sessions.size(); ++q) {
    std::optional<TimeGrid> session_grid;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const auto it = groups.find({q, k});
      if (it == groups.end()) {
        throw DataError(std::string(source) + ": agent " + agents[k] + " has no samples in session " +
                        sessions[q]);
      }
      auto& rows = it->second;
      std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
      TimeGrid grid{rows.front().time, 1.0, rows.size()};
      if (rows.size() >= 2) {
        grid.step = (rows.back().time - rows.front().time) / static_cast<double>(rows.size() - 1);
      } else if (session_grid) {
        grid.step = session_grid->step;
      }
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (same_time(rows[i].time, rows[i - 1].time, grid.step)) {
          throw DataError(at_line(source, rows[i].line) + "duplicate sample for agent " + agents[k] +
                          " in session " + sessions[q] + " at t=" + format_double(rows[i].time));
        }
        if (!same_time(rows[i].time, grid.point(i), grid.step)) {
          throw DataError(at_line(source, rows[i].line) + "non-uniform time step for agent " + agents[k] +
                          " in session " + sessions[q]);
        }
      }
      if (!session_grid) {
        session_grid = grid;
      } else if (grid.num_points != session_grid->num_points ||
                 !same_time(grid.start, session_grid->start, grid.step) ||
                 !same_time(grid.step, session_grid->step, grid.step)) {
        throw DataError(at_line(source, rows.front().line) + "agent " + agents[k] + " in session " +
                        sessions[q] + " has " + std::to_string(grid.num_points) +
                        " samples on a grid that does not align with the session grid (" +
                        std::to_string(session_grid->num_points) + " samples)");
      }
      std::vector<double> values;
      values.reserve(rows.size() * dimension);
      for (const auto& r : rows) values.insert(values.end(), r.values.begin(), r.values.end());
      trajectories.emplace_back(agents[k], sessions[q], *session_grid, dimension, std::move(values));
    }
  }
  return Dataset(std::move(agents), std::move(sessions), std::move(trajectories));
}

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  return parse_dataset(in, schema, path.string());
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
  out << "session_id,agent_id,t";
  for (std::size_t c = 0; c < dataset.dimension(); ++c) out << ",x" << (c + 1);
  out << '\n';
  for (std::size_t q = 0; q < dataset.num_sessions(); ++q) {
    for (std::size_t k = 0; k < dataset.num_agents(); ++k) {
      const Trajectory& traj = dataset.trajectory(k, q);
      for (std::size_t i = 0; i < traj.size(); ++i) {
        out << traj.session_id() << ',' << traj.agent_id() << ',' << format_double(traj.grid().point(i));
        for (const double v : traj.sample(i)) out << ',' << format_double(v);
        out << '\n';
      }
    }
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file " + path.string());
  save_dataset(dataset, out);
}

// Furniture generator ----------------------------------------------------------

namespace {

geometry::Point2 centroid(const geometry::Polygon& polygon) {
  geometry::Point2 c;
  for (const auto& v : polygon.vertices) {
    c.x += v.x;
    c.y += v.y;
  }
  const auto n = static_cast<double>(polygon.vertices.size());
  return {c.x / n, c.y / n};
}

geometry::Point2 lerp(geometry::Point2 a, geometry::Point2 b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

}  // namespace

FurnitureScenario generate_furniture_dataset(const FurnitureOptions& options) {
  if (options.num_agents == 0 || options.num_points == 0 || options.num_sessions == 0) {
    throw DataError("generator needs at least one agent, sample and session");
  }
  if (!(options.noise >= 0.0)) throw DataError("noise standard deviation must be non-negative");
  if (!options.schedule.empty() && options.schedule.size() != options.num_agents) {
    throw DataError("schedule must list intervals for every agent");
  }
  if (options.layout.region1.empty() || options.layout.region2.empty()) {
    throw DataError("furniture layout regions must be non-empty");
  }
  if (options.timing.cycle() == 0) throw DataError("trip cycle must be positive");

  std::vector<std::vector<TaskInterval>> schedule = options.schedule;
  schedule.resize(options.num_agents);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    auto& intervals = schedule[k];
    std::sort(intervals.begin(), intervals.end(),
              [](const TaskInterval& a, const TaskInterval& b) { return a.begin < b.begin; });
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto& iv = intervals[i];
      if (iv.begin >= iv.end || iv.end > options.num_points) {
        throw DataError("agent " + std::to_string(k + 1) + ": malformed task interval [" +
                        std::to_string(iv.begin) + "," + std::to_string(iv.end) + ")");
      }
      if (i > 0 && iv.begin < intervals[i - 1].end) {
        throw DataError("agent " + std::to_string(k + 1) + ": overlapping task intervals");
      }
    }
  }

  const auto home = centroid(options.layout.region1);
  const auto away = centroid(options.layout.region2);
  const auto& timing = options.timing;

  // Noise-free path per agent; identical in every session.
  std::vector<std::vector<geometry::Point2>> paths(options.num_agents,
                                                   std::vector<geometry::Point2>(options.num_points, home));
  for (std::size_t k = 0; k < options.num_agents; ++k) {
    for (const auto& iv : schedule[k]) {
      for (std::size_t s = iv.begin; s + timing.cycle() <= iv.end; s += timing.cycle()) {
        std::size_t i = s + timing.dwell_home;
        const double denom = static_cast<double>(timing.travel + 1);
        for (std::size_t j = 1; j <= timing.travel; ++j) paths[k][i++] = lerp(home, away, j / denom);
        for (std::size_t j = 0; j < timing.dwell_away; ++j) paths[k][i++] = away;
        for (std::size_t j = 1; j <= timing.travel; ++j) paths[k][i++] = lerp(away, home, j / denom);
      }
    }
  }

  std::vector<std::string> agents;
  for (std::size_t k = 0; k < options.num_agents; ++k) agents.push_back(std::to_string(k + 1));
  std::vector<std::string> sessions;
  for (std::size_t q = 0; q < options.num_sessions; ++q) sessions.push_back("s" + std::to_string(q + 1));

  const TimeGrid grid{0.0, options.step, options.num_points};
  std::vector<Trajectory> trajectories;
  trajectories.reserve(options.num_agents * options.num_sessions);
  for (std::size_t q = 0; q < options.num_sessions; ++q) {
    for (std::size_t k = 0; k < options.num_agents; ++k) {
      std::vector<double> values;
      values.reserve(options.num_points * 2);
      std::mt19937_64 rng(derive_seed(options.seed, sessions[q] + "/" + agents[k]));
      std::normal_distribution<double> gauss(0.0, options.noise);
      for (const auto& p : paths[k]) {
        double dx = 0.0;
        double dy = 0.0;
        if (options.noise > 0.0) {
          dx = gauss(rng);
          dy = gauss(rng);
        }
        values.push_back(p.x + dx);
        values.push_back(p.y + dy);
      }
      trajectories.emplace_back(agents[k], sessions[q], grid, 2, std::move(values));
    }
  }

  return FurnitureScenario{Dataset(std::move(agents), std::move(sessions), std::move(trajectories)),
                           options.layout.region1, options.layout.region2, options.layout.room, timing};
}

FurnitureScenario generate_furniture_dataset(std::size_t num_agents, std::size_t num_points,
                                             std::vector<std::vector<TaskInterval>> schedule,
                                             double noise, std::uint64_t seed) {
  FurnitureOptions options;
  options.num_agents = num_agents;
  options.num_points = num_points;
  options.schedule = std::move(schedule);
  options.noise = noise;
  options.seed = seed;
  return generate_furniture_dataset(options);
}

std::vector<std::vector<int>> two_crew_pattern() {
  return {{1, 1, 0, 0, 1, 1, 0, 0}, {1, 1, 0, 0, 1, 1, 0, 0}, {1, 1, 0, 0, 1, 1, 0, 0}, {0, 0, 1, 1, 0, 0, 1, 1},
          {0, 0, 1, 1, 0, 0, 1, 1}, {0, 0, 1, 1, 0, 0, 1, 1}, {1, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0, 0, 0}};
}

std::vector<std::vector<TaskInterval>> block_schedule(const std::vector<std::vector<int>>& pattern,
                                                      std::size_t block, std::size_t offset,
                                                      std::size_t num_blocks) {
  std::vector<std::vector<TaskInterval>> schedule(pattern.size());
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const auto& row = pattern[k];
    if (row.empty()) continue;
    for (std::size_t b = 0; b < num_blocks; ++b) {
      if (row[b % row.size()] == 0) continue;
      const TaskInterval iv{offset + b * block, offset + (b + 1) * block};
      if (!schedule[k].empty() && schedule[k].back().end == iv.begin) {
        schedule[k].back().end = iv.end;
      } else {
        schedule[k].push_back(iv);
      }
    }
  }
  return schedule;
}

}  // namespace censtl
