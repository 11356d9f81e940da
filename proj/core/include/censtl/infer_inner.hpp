#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "censtl/census.hpp"
#include "censtl/geometry.hpp"
#include "censtl/pso.hpp"
#include "censtl/stl.hpp"
#include "censtl/trajdata.hpp"

namespace censtl::inner {

class InnerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TemplateKind { Predicate, Sequential, Concurrent, Persistent, Causal };

/// Task template tree. Leaves are predicate slots; inner nodes are the four
/// task shapes:
///   Sequential  G[0,t1) s1 & F[t21,t22) G[0,t23) s2 & ...
///   Concurrent  G[0,t1) (s1 | ... | sz)
///   Persistent  G[0,t1) F[0,t2) s
///   Causal      G[0,t1) (s1 => s2)
struct TaskTemplate {
  TemplateKind kind = TemplateKind::Predicate;
  std::size_t slot = 0;
  std::vector<TaskTemplate> children;

  static TaskTemplate predicate(std::size_t slot);
  static TaskTemplate sequential(std::vector<TaskTemplate> subtasks);
  static TaskTemplate concurrent(std::vector<TaskTemplate> subtasks);
  static TaskTemplate persistent(TaskTemplate subtask);
  static TaskTemplate causal(TaskTemplate cause, TaskTemplate effect);

  bool operator==(const TaskTemplate&) const = default;
};

/// Text form: `seq(p0,p1)`, `conc(p0,p1)`, `persist(p0)`, `causal(p0,p1)`; nests.
TaskTemplate parse_template(std::string_view text);
std::string format_template(const TaskTemplate& t);

/// Number of distinct predicate slots (slots must be numbered 0..n-1).
std::size_t predicate_slots(const TaskTemplate& t);
/// Number of temporal parameters, depth-first in template order.
std::size_t temporal_param_count(const TaskTemplate& t);
bool is_nested(const TaskTemplate& t);

struct InnerConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// Upper limit on the necessary length, seconds.
  double tau_limit = 12.0;
  /// A priori regions, one per predicate slot.
  std::vector<geometry::Polygon> apriori;
  geometry::Box bbox;
  /// Half-planes per learned predicate.
  std::size_t halfplanes = 4;
  bool allow_nesting = false;
  /// Fraction of the swarm whose predicates start on the a priori regions.
  double warm_start = 0.1;
  pso::PSOConfig pso;
};

/// A concrete task formula and the inner formula F[-L,0] phi_t wrapped around it.
struct Instantiated {
  stl::InnerFormula phi;
  stl::InnerFormula phi_t;
  std::vector<geometry::HalfPlanePredicate> predicates;
  std::vector<double> taus;
  double length = 0.0;
};

/// Builds the formula from raw temporal parameters. Throws InnerError when an
/// ordering constraint is violated or a window is degenerate.
Instantiated instantiate(const TaskTemplate& t, std::span<const double> taus,
                         std::vector<geometry::HalfPlanePredicate> predicates);

/// Sequential parameters are searched as non-negative gaps; this maps a gap
/// vector to raw parameters (identity for the other templates).
std::vector<double> gaps_to_taus(const TaskTemplate& t, std::span<const double> gaps);

/// Search space: temporal gaps first, then per slot and per row the w-1
/// angles and the offset.
pso::SearchSpace search_space(const TaskTemplate& t, const InnerConfig& cfg, std::size_t dimension, double step);
Instantiated decode(const TaskTemplate& t, std::span<const double> alpha, const InnerConfig& cfg,
                    std::size_t dimension);

struct CostBreakdown {
  double consistency = 0.0;
  double frequency = 0.0;
  double specificity = 0.0;
  std::vector<double> hausdorff;
  double penalty = 0.0;
  double total = 0.0;
};

/// Penalty for candidates that cannot be evaluated (empty domain, bad parameters).
inline constexpr double kInfeasiblePenalty = 1e9;
/// Cost per second of necessary length above tau_limit.
inline constexpr double kLengthPenalty = 1e6;

/// sum_q v_q - lambda1 sum_k m_k + lambda2 sum_i dH(X_i, p_i) + length penalty.
CostBreakdown cost_jstl(const Instantiated& candidate, const Dataset& data, const InnerConfig& cfg);

/// Hausdorff distance between an a priori region and a learned predicate,
/// both clipped to the bounding box; an empty learned region scores twice the
/// box diagonal.
double region_distance(const geometry::Polygon& apriori, const geometry::HalfPlanePredicate& learned,
                       const geometry::Box& bbox);

struct InnerResult {
  Instantiated best;
  std::vector<double> alpha;
  CostBreakdown cost;
  pso::Result search;
};

/// Throws InnerError when no candidate satisfies the necessary-length limit.
InnerResult infer_inner(const Dataset& data, const TaskTemplate& t, const InnerConfig& cfg);

void write_inner_report(const InnerResult& result, const InnerConfig& cfg, std::ostream& out);

}  // namespace censtl::inner
