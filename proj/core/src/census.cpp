#include "censtl/census.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "censtl/format.hpp"
#include "censtl/parallel.hpp"

namespace censtl::census {

SignatureMatrix::SignatureMatrix(std::vector<std::string> agents, std::vector<std::string> sessions,
                                 std::vector<TimeGrid> grids, std::vector<std::vector<std::uint8_t>> bits)
    : agents_(std::move(agents)), sessions_(std::move(sessions)), grids_(std::move(grids)), bits_(std::move(bits)) {
  if (grids_.size() != sessions_.size() || bits_.size() != sessions_.size()) {
    throw CensusError("signature matrix needs one grid and one block per session");
  }
  for (std::size_t q = 0; q < sessions_.size(); ++q) {
    if (bits_[q].size() != agents_.size() * grids_[q].num_points) {
      throw CensusError("signature block of session " + sessions_[q] + " has the wrong size");
    }
    for (const auto b : bits_[q]) {
      if (b > 1) throw CensusError("signature entries must be 0 or 1");
    }
  }
}

SignatureMatrix SignatureMatrix::from_rows(const std::vector<std::vector<int>>& rows,
                                           std::vector<std::string> agents) {
  if (rows.empty()) throw CensusError("signature rows are empty");
  const std::size_t l = rows.front().size();
  if (agents.empty()) {
    for (std::size_t k = 0; k < rows.size(); ++k) agents.push_back(std::to_string(k + 1));
  }
  if (agents.size() != rows.size()) throw CensusError("one agent id per signature row is required");
  std::vector<std::uint8_t> bits;
  bits.reserve(rows.size() * l);
  for (const auto& row : rows) {
    if (row.size() != l) throw CensusError("signature rows have different lengths");
    for (const int v : row) {
      if (v != 0 && v != 1) throw CensusError("signature entries must be 0 or 1");
      bits.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return SignatureMatrix(std::move(agents), {"1"}, {TimeGrid{0.0, 1.0, l}}, {std::move(bits)});
}

std::size_t SignatureMatrix::total_length() const {
  std::size_t total = 0;
  for (const auto& g : grids_) total += g.num_points;
  return total;
}

std::size_t SignatureMatrix::agent_index(const std::string& id) const {
  const auto it = std::find(agents_.begin(), agents_.end(), id);
  if (it == agents_.end()) throw CensusError("unknown agent '" + id + "'");
  return static_cast<std::size_t>(it - agents_.begin());
}

AgentSet SignatureMatrix::resolve(const std::vector<std::string>& ids) const {
  AgentSet out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(agent_index(id));
  return out;
}

namespace {

void check_agents(const SignatureMatrix& sig, const AgentSet& set) {
  for (const auto k : set) {
    if (k >= sig.num_agents()) throw CensusError("unknown agent index " + std::to_string(k));
  }
}

}  // namespace

SignatureMatrix signatures(const stl::InnerFormula& phi, const Dataset& data) {
  const std::size_t n = data.num_agents();
  const std::size_t z = data.num_sessions();
  std::vector<TimeGrid> grids;
  std::vector<stl::TimeDomain> domains;
  for (std::size_t q = 0; q < z; ++q) {
    const TimeGrid& g = data.grid(q);
    const auto d = stl::time_domain(phi, g);
    if (d.empty()) {
      throw CensusError("formula has an empty time domain on session " + data.sessions()[q] +
                        " (its window exceeds the trace)");
    }
    domains.push_back(d);
    grids.push_back(TimeGrid{g.point(static_cast<std::size_t>(d.first)), g.step, d.size()});
  }
  std::vector<std::vector<std::uint8_t>> bits(z);
  for (std::size_t q = 0; q < z; ++q) bits[q].assign(n * grids[q].num_points, 0);
  parallel_for(n * z, [&](std::size_t task) {
    const std::size_t q = task / n;
    const std::size_t k = task % n;
    const auto r = stl::robustness_series(phi, data.trajectory(k, q));
    auto* row = bits[q].data() + k * grids[q].num_points;
    for (std::size_t j = 0; j < r.size(); ++j) row[j] = r[j] > 0.0 ? 1 : 0;
  });
  return SignatureMatrix(data.agents(), data.sessions(), std::move(grids), std::move(bits));
}

CensusTrajectory census(const SignatureMatrix& sig, const AgentSet& subset) {
  check_agents(sig, subset);
  CensusTrajectory c;
  c.counts.resize(sig.num_sessions());
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) {
    auto& series = c.counts[q];
    series.assign(sig.length(q), 0);
    for (const auto k : subset) {
      for (std::size_t j = 0; j < series.size(); ++j) series[j] += sig.at(q, k, j) ? 1 : 0;
    }
  }
  return c;
}

double variation(const CensusTrajectory& c) {
  double total = 0.0;
  for (const auto& series : c.counts) {
    if (series.size() < 2) throw CensusError("variation needs at least two time points per session");
    long changes = 0;
    for (std::size_t j = 1; j < series.size(); ++j) changes += std::abs(series[j] - series[j - 1]);
    total += static_cast<double>(changes) / static_cast<double>(series.size() - 1);
  }
  return total;
}

double variation(const SignatureMatrix& sig, const AgentSet& subset) { return variation(census(sig, subset)); }

std::size_t frequency(const SignatureMatrix& sig, std::size_t agent) {
  check_agents(sig, {agent});
  std::size_t count = 0;
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) {
    for (std::size_t j = 0; j < sig.length(q); ++j) count += sig.at(q, agent, j) ? 1 : 0;
  }
  return count;
}

double support(const SignatureMatrix& sig, const AgentSet& e) {
  if (e.empty()) throw CensusError("support needs a non-empty agent set");
  check_agents(sig, e);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) {
    for (std::size_t j = 0; j < sig.length(q); ++j) {
      bool all = true;
      for (const auto k : e) all = all && sig.at(q, k, j);
      hits += all ? 1 : 0;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sig.total_length());
}

double count_variance(const SignatureMatrix& sig, const AgentSet& e) {
  if (e.empty()) throw CensusError("variance needs a non-empty agent set");
  const auto c = census(sig, e);
  const double total = static_cast<double>(sig.total_length());
  double sum = 0.0;
  for (const auto& series : c.counts) {
    for (const int v : series) sum += v;
  }
  const double mean = sum / total;
  double ss = 0.0;
  for (const auto& series : c.counts) {
    for (const int v : series) ss += (v - mean) * (v - mean);
  }
  return ss / total;
}

stl::CountSignal count_signal(const SignatureMatrix& sig, const std::vector<std::string>& names,
                              const std::vector<CensusTrajectory>& censuses, std::size_t q) {
  if (names.size() != censuses.size()) throw CensusError("one name per census trajectory is required");
  stl::CountSignal s;
  s.grid = sig.grid(q);
  s.subgroups = names;
  for (const auto& c : censuses) s.counts.push_back(c.counts.at(q));
  return s;
}

void write_signatures_csv(const SignatureMatrix& sig, std::ostream& out) {
  out << "session_id,t";
  for (const auto& a : sig.agents()) out << ',' << a;
  out << '\n';
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) {
    for (std::size_t j = 0; j < sig.length(q); ++j) {
      out << sig.sessions()[q] << ',' << format_double(sig.grid(q).point(j));
      for (std::size_t k = 0; k < sig.num_agents(); ++k) out << ',' << (sig.at(q, k, j) ? 1 : 0);
      out << '\n';
    }
  }
}

void write_census_csv(const SignatureMatrix& sig, const std::vector<std::string>& names,
                      const std::vector<CensusTrajectory>& censuses, std::ostream& out) {
  out << "session_id,t";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t q = 0; q < sig.num_sessions(); ++q) {
    for (std::size_t j = 0; j < sig.length(q); ++j) {
      out << sig.sessions()[q] << ',' << format_double(sig.grid(q).point(j));
      for (const auto& c : censuses) out << ',' << c.counts.at(q).at(j);
      out << '\n';
    }
  }
}

std::vector<stl::CountSignal> read_census_csv(std::istream& in, double step) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (const auto f : split(t, ',')) header.emplace_back(trim(f));
    break;
  }
  if (header.size() < 3 || header[0] != "session_id" || header[1] != "t") {
    throw CensusError("census CSV needs a header 'session_id,t,<subgroups>'");
  }
  const std::vector<std::string> names(header.begin() + 2, header.end());
  std::vector<stl::CountSignal> out;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> times;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (fields.size() != header.size()) {
      throw CensusError("census CSV line " + std::to_string(line_no) + ": wrong number of fields");
    }
    const std::string id(trim(fields[0]));
    if (ids.empty() || ids.back() != id) {
      if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
        throw CensusError("census CSV line " + std::to_string(line_no) + ": session rows are not contiguous");
      }
      ids.push_back(id);
      stl::CountSignal s;
      s.subgroups = names;
      s.counts.resize(names.size());
      out.push_back(std::move(s));
      times.emplace_back();
    }
    double time = 0.0;
    if (!parse_double(fields[1], time)) {
      throw CensusError("census CSV line " + std::to_string(line_no) + ": invalid time");
    }
    times.back().push_back(time);
    for (std::size_t c = 0; c < names.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c + 2], v) || v < 0.0 || v != static_cast<int>(v)) {
        throw CensusError("census CSV line " + std::to_string(line_no) + ": counts must be non-negative integers");
      }
      out.back().counts[c].push_back(static_cast<int>(v));
    }
  }
  for (std::size_t q = 0; q < out.size(); ++q) {
    const auto& ts = times[q];
    out[q].grid.start = ts.front();
    out[q].grid.num_points = ts.size();
    out[q].grid.step = ts.size() >= 2 ? (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1) : step;
  }
  return out;
}

}  // namespace censtl::census
