#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "censtl/stl.hpp"
#include "censtl/trajdata.hpp"

namespace censtl::census {

class CensusError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Agent indices into a SignatureMatrix.
using AgentSet = std::vector<std::size_t>;

/// Binary satisfaction table s_q(k, j), one block per session over that
/// session's formula time domain.
class SignatureMatrix {
 public:
  SignatureMatrix() = default;
  /// `bits[q]` is row-major (agents x grids[q].num_points), entries 0/1.
  SignatureMatrix(std::vector<std::string> agents, std::vector<std::string> sessions,
                  std::vector<TimeGrid> grids, std::vector<std::vector<std::uint8_t>> bits);

  /// Single-session matrix from 0/1 rows (one row per agent), unit step.
  static SignatureMatrix from_rows(const std::vector<std::vector<int>>& rows,
                                   std::vector<std::string> agents = {});

  std::size_t num_agents() const { return agents_.size(); }
  std::size_t num_sessions() const { return sessions_.size(); }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::vector<std::string>& sessions() const { return sessions_; }
  /// Grid of the evaluable points of session q (starts at the domain's first time).
  const TimeGrid& grid(std::size_t q) const { return grids_.at(q); }
  std::size_t length(std::size_t q) const { return grids_.at(q).num_points; }
  std::size_t total_length() const;

  bool at(std::size_t q, std::size_t agent, std::size_t j) const {
    return bits_[q][agent * grids_[q].num_points + j] != 0;
  }

  /// Throws CensusError for unknown ids.
  AgentSet resolve(const std::vector<std::string>& ids) const;
  std::size_t agent_index(const std::string& id) const;

 private:
  std::vector<std::string> agents_;
  std::vector<std::string> sessions_;
  std::vector<TimeGrid> grids_;
  std::vector<std::vector<std::uint8_t>> bits_;
};

/// Per-session census counts n_q(j) of one subgroup.
struct CensusTrajectory {
  std::vector<std::vector<int>> counts;
};

/// s = 1 iff robustness > 0. Throws CensusError when some session's time domain is empty.
SignatureMatrix signatures(const stl::InnerFormula& phi, const Dataset& data);

CensusTrajectory census(const SignatureMatrix& sig, const AgentSet& subset);

/// Sum over sessions of mean absolute step change of the census.
double variation(const SignatureMatrix& sig, const AgentSet& subset);
double variation(const CensusTrajectory& census);

/// Number of ones for the agent over every session.
std::size_t frequency(const SignatureMatrix& sig, std::size_t agent);

/// Fraction of time points at which every agent of e is satisfied.
double support(const SignatureMatrix& sig, const AgentSet& e);

/// Population variance of the per-point count of satisfied agents in e,
/// pooled across sessions.
double count_variance(const SignatureMatrix& sig, const AgentSet& e);

/// Session-q census of named subgroups as an outer-formula signal.
stl::CountSignal count_signal(const SignatureMatrix& sig, const std::vector<std::string>& names,
                              const std::vector<CensusTrajectory>& censuses, std::size_t q);

/// CSV: session, t index, one column per agent.
void write_signatures_csv(const SignatureMatrix& sig, std::ostream& out);
/// CSV: session, t index, one column per subgroup.
void write_census_csv(const SignatureMatrix& sig, const std::vector<std::string>& names,
                      const std::vector<CensusTrajectory>& censuses, std::ostream& out);
/// Inverse of write_census_csv; one CountSignal per session.
std::vector<stl::CountSignal> read_census_csv(std::istream& in, double step = 1.0);

}  // namespace censtl::census
