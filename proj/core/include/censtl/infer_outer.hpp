#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "censtl/partition.hpp"
#include "censtl/pso.hpp"
#include "censtl/stl.hpp"

namespace censtl::outer {

class OuterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using partition::Relationship;

/// The eight cause/effect shapes. With cs, es the static cause and effect:
///   InstDur      G[0,Tc-t2)    (cs => G[t1,t2) es)
///   InstEvent    G[0,Tc-t2)    (cs => F[t1,t2) es)
///   InstEventDur G[0,Tc-t2-t3) (cs => F[t1,t2) G[0,t3) es)
///   InstPersist  G[0,Tc-t2-t3) (cs => G[t1,t2) F[0,t3) es)
///   DurDur       G[0,Tc-t3)    (G[0,t1) cs => G[t2,t3) es)
///   DurEvent     G[0,Tc-t3)    (G[0,t1) cs => F[t2,t3) es)
///   DurEventDur  G[0,Tc-t3-t4) (G[0,t1) cs => F[t2,t3) G[0,t4) es)
///   DurPersist   G[0,Tc-t3-t4) (G[0,t1) cs => G[t2,t3) F[0,t4) es)
enum class OuterTemplateKind { InstDur, InstEvent, InstEventDur, InstPersist, DurDur, DurEvent, DurEventDur, DurPersist };

std::span<const OuterTemplateKind> all_outer_templates();
std::string_view template_name(OuterTemplateKind kind);
/// Accepts the names above, case-insensitively.
OuterTemplateKind parse_template_kind(std::string_view name);
std::size_t tau_count(OuterTemplateKind kind);
bool durational_cause(OuterTemplateKind kind);

struct OuterTemplate {
  OuterTemplateKind kind = OuterTemplateKind::InstDur;
  std::vector<double> taus;
};

/// lower < n(phi, subgroup) < upper
struct CountBound {
  std::string subgroup;
  int lower = 0;
  int upper = 0;

  bool operator==(const CountBound&) const = default;
};

struct RelationshipAtoms {
  Relationship relationship = Relationship::Similarity;
  // Similarity: n(cause) > cause_threshold, n(effect) > effect_threshold.
  std::string cause;
  std::string effect;
  int cause_threshold = 0;
  int effect_threshold = 0;
  // Complementarity: one bound per subgroup on each side.
  std::vector<CountBound> cause_bounds;
  std::vector<CountBound> effect_bounds;

  static RelationshipAtoms similarity(std::string cause, int c1, std::string effect, int c2);
  static RelationshipAtoms complementarity(std::vector<CountBound> cause_bounds, std::vector<CountBound> effect_bounds);
};

struct OuterInstance {
  stl::OuterFormula gamma;
  stl::OuterFormula cause;
  stl::OuterFormula effect;
  /// T_gamma, seconds.
  double horizon = 0.0;
};

/// `census_length` is T_c in seconds. Throws OuterError on a bad parameter
/// vector or a non-positive horizon.
OuterInstance instantiate_outer(const OuterTemplate& tmpl, const RelationshipAtoms& atoms, double census_length);

/// T_c of a census set: the shortest session, in seconds.
double census_length(std::span<const stl::CountSignal> census);

/// Points at which gamma holds, summed over sessions. Throws OuterError if some
/// session has an empty domain.
std::size_t count_true(const stl::OuterFormula& gamma, std::span<const stl::CountSignal> census);

struct Accuracy {
  /// m(cause & effect) / m(cause), or -1 when the cause never holds.
  double p = -1.0;
  std::size_t m_ce = 0;
  std::size_t m_c = 0;
};

/// Counts run over the intersection of the cause and effect domains.
Accuracy accuracy(const stl::OuterFormula& cause, const stl::OuterFormula& effect,
                  std::span<const stl::CountSignal> census);
/// Accuracy on held-out census data.
Accuracy validate(const stl::OuterFormula& cause, const stl::OuterFormula& effect,
                  std::span<const stl::CountSignal> census);

struct Subgroup {
  std::string name;
  int size = 0;
};

struct OuterConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  pso::PSOConfig pso;
  /// Similarity cause/effect subgroup indices; all ordered pairs when unset.
  std::optional<std::pair<std::size_t, std::size_t>> pair;
};

struct Candidate {
  OuterTemplate tmpl;
  RelationshipAtoms atoms;
  OuterInstance instance;
  Accuracy acc;
  double objective = 0.0;
  /// Necessary length of cause => effect, seconds.
  double span = 0.0;
};

/// Cost per violated complementarity gap (upper - lower <= 1).
inline constexpr double kGapPenalty = 1e6;
/// Cost of a parameter vector that does not give a valid formula.
inline constexpr double kInvalidPenalty = 1e9;

/// Similarity: -100p - l1 m_c - l2 (c1 + c2).
/// Complementarity: -100p - l1 m_c + l2 sum(upper - lower), plus kGapPenalty per narrow bound.
double objective(const Accuracy& acc, const RelationshipAtoms& atoms, double lambda1, double lambda2);

/// p descending, m_c descending, span ascending, objective ascending.
bool ranks_before(const Candidate& a, const Candidate& b);

/// One PSO search for a fixed template (and, for similarity, a fixed pair).
Candidate search_outer(std::span<const stl::CountSignal> census, std::span<const Subgroup> subgroups,
                       Relationship relationship, OuterTemplateKind kind, std::pair<std::size_t, std::size_t> pair,
                       const OuterConfig& cfg);

/// Exhaustive minimum of the objective over the same discrete grid the PSO
/// searches. Ties keep the first point in enumeration order.
Candidate enumerate_outer(std::span<const stl::CountSignal> census, std::span<const Subgroup> subgroups,
                          Relationship relationship, OuterTemplateKind kind, std::pair<std::size_t, std::size_t> pair,
                          const OuterConfig& cfg);

/// Best candidate of every template (and pair), ranked. Throws OuterError if
/// no search found a valid formula.
std::vector<Candidate> infer_outer(std::span<const stl::CountSignal> census, std::span<const Subgroup> subgroups,
                                   Relationship relationship, std::span<const OuterTemplateKind> templates,
                                   const OuterConfig& cfg);

/// CSV: formula, template, m_ce, m_c, p, mv_ce, mv_c, pv. Validation columns
/// stay empty when `validation` has no entry for a row.
void write_outer_report(std::span<const Candidate> candidates, std::span<const std::optional<Accuracy>> validation,
                        std::ostream& out);

}  // namespace censtl::outer
