#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "censtl/geometry.hpp"
#include "censtl/trajdata.hpp"

namespace censtl::stl {

class StlError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public StlError {
 public:
  ParseError(std::size_t position, const std::string& message)
      : StlError("position " + std::to_string(position) + ": " + message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Time interval in seconds; the bounds may be negative.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;

  static Interval closed_open(double lo, double hi) { return {lo, hi, true, false}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  bool operator==(const Interval&) const = default;
};

/// Integer sample offsets [lo, hi] relative to the evaluation index.
struct Offsets {
  std::ptrdiff_t lo = 0;
  std::ptrdiff_t hi = -1;

  bool empty() const { return lo > hi; }
};

/// Grid points that belong to the interval.
Offsets exact_offsets(const Interval& interval, double step);
/// Closed hull [ceil(lo/step), floor(hi/step)], used for domain bookkeeping.
Offsets hull_offsets(const Interval& interval, double step);

/// Contiguous index range [first, last] of a grid; empty when first > last.
struct TimeDomain {
  std::ptrdiff_t first = 0;
  std::ptrdiff_t last = -1;

  bool empty() const { return first > last; }
  std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>(last - first + 1); }
  bool contains(std::ptrdiff_t i) const { return i >= first && i <= last; }
  bool operator==(const TimeDomain& other) const {
    return (empty() && other.empty()) || (first == other.first && last == other.last);
  }
};

TimeDomain intersect(const TimeDomain& a, const TimeDomain& b);

struct PredicateAtom {
  /// Empty for inline predicates.
  std::string name;
  geometry::HalfPlanePredicate predicate;

  bool operator==(const PredicateAtom&) const = default;
};

enum class Direction { Greater, Less };

/// n(phi, S) > threshold  or  n(phi, S) < threshold.
struct CensusAtom {
  std::string subgroup;
  Direction direction = Direction::Greater;
  int threshold = 0;

  bool operator==(const CensusAtom&) const = default;
};

enum class Op { True, Atom, Not, And, Or, Implies, Until, Always, Eventually };

/// Immutable STL syntax tree with shared subtrees.
template <class A>
class Formula {
 public:
  struct Node {
    Op op = Op::True;
    A atom{};
    Interval interval{};
    std::vector<Formula> children;

    bool operator==(const Node&) const = default;
  };

  Formula() : node_(std::make_shared<const Node>()) {}

  static Formula top() { return Formula(); }
  static Formula atom(A a) { return make(Node{Op::Atom, std::move(a), {}, {}}); }
  static Formula negate(Formula f) { return make(Node{Op::Not, {}, {}, {std::move(f)}}); }
  static Formula conj(std::vector<Formula> fs) { return nary(Op::And, std::move(fs)); }
  static Formula disj(std::vector<Formula> fs) { return nary(Op::Or, std::move(fs)); }
  static Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }
  static Formula implies(Formula a, Formula b) {
    return make(Node{Op::Implies, {}, {}, {std::move(a), std::move(b)}});
  }
  static Formula until(Interval i, Formula a, Formula b) {
    return make(Node{Op::Until, {}, check(i), {std::move(a), std::move(b)}});
  }
  static Formula always(Interval i, Formula f) { return make(Node{Op::Always, {}, check(i), {std::move(f)}}); }
  static Formula eventually(Interval i, Formula f) {
    return make(Node{Op::Eventually, {}, check(i), {std::move(f)}});
  }

  Op op() const { return node_->op; }
  const A& atom() const { return node_->atom; }
  const Interval& interval() const { return node_->interval; }
  const std::vector<Formula>& children() const { return node_->children; }
  const Formula& child(std::size_t i = 0) const { return node_->children.at(i); }
  bool is_temporal() const { return op() == Op::Until || op() == Op::Always || op() == Op::Eventually; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.node_ == b.node_ || *a.node_ == *b.node_;
  }

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Node node) { return Formula(std::make_shared<const Node>(std::move(node))); }
  static Formula nary(Op op, std::vector<Formula> fs) {
    if (fs.empty()) throw StlError("conjunction/disjunction needs at least one operand");
    if (fs.size() == 1) return std::move(fs.front());
    return make(Node{op, {}, {}, std::move(fs)});
  }
  static Interval check(Interval i) {
    if (!(i.lo <= i.hi)) throw StlError("interval lower bound exceeds upper bound");
    return i;
  }

  std::shared_ptr<const Node> node_;
};

using InnerFormula = Formula<PredicateAtom>;
using OuterFormula = Formula<CensusAtom>;

/// Per-subgroup census counts on a shared grid (one session).
struct CountSignal {
  TimeGrid grid;
  std::vector<std::string> subgroups;
  std::vector<std::vector<int>> counts;

  std::size_t size() const { return grid.num_points; }
  /// Throws StlError for an unknown subgroup.
  const std::vector<int>& series(std::string_view subgroup) const;
};

// Evaluation --------------------------------------------------------------------

TimeDomain time_domain(const InnerFormula& phi, const TimeGrid& grid);
TimeDomain time_domain(const OuterFormula& phi, const TimeGrid& grid);

/// Throws StlError if t is outside time_domain(phi).
double robustness(const InnerFormula& phi, const Trajectory& x, std::size_t t);
double robustness(const OuterFormula& phi, const CountSignal& x, std::size_t t);
bool eval_boolean(const InnerFormula& phi, const Trajectory& x, std::size_t t);
bool eval_boolean(const OuterFormula& phi, const CountSignal& x, std::size_t t);

/// Values over time_domain(phi), in index order.
std::vector<double> robustness_series(const InnerFormula& phi, const Trajectory& x);
std::vector<double> robustness_series(const OuterFormula& phi, const CountSignal& x);
std::vector<bool> eval_series(const InnerFormula& phi, const Trajectory& x);
std::vector<bool> eval_series(const OuterFormula& phi, const CountSignal& x);

/// Longest chain of interval upper bounds, in seconds. Throws on a negative
/// interval bound.
double necessary_length(const InnerFormula& phi);
double necessary_length(const OuterFormula& phi);

// Text form -----------------------------------------------------------------------

using PredicateTable = std::map<std::string, geometry::HalfPlanePredicate, std::less<>>;

struct ParseOptions {
  /// Dimension of inline predicates; 0 infers it from the highest x index.
  std::size_t dimension = 0;
};

InnerFormula parse_inner(std::string_view text, const PredicateTable& table = {},
                         const ParseOptions& options = {});
OuterFormula parse_outer(std::string_view text);

std::string format_formula(const InnerFormula& phi);
std::string format_formula(const OuterFormula& phi);
std::string format_interval(const Interval& interval);
std::string format_predicate(const geometry::HalfPlanePredicate& predicate);

}  // namespace censtl::stl
