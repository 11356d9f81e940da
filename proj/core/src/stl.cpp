#include "censtl/stl.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace censtl::stl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSnap = 1e-9;

using Index = std::ptrdiff_t;

struct TrajectoryView {
  const Trajectory& x;

  std::size_t size() const { return x.size(); }
  double step() const { return x.grid().step; }
  double atom(const PredicateAtom& a, std::size_t i) const {
    return geometry::predicate_robustness(a.predicate, x.sample(i));
  }
  bool holds(const PredicateAtom& a, std::size_t i) const {
    const auto s = x.sample(i);
    if (a.predicate.dimension() != s.size()) geometry::predicate_robustness(a.predicate, s);
    for (const auto& row : a.predicate.rows()) {
      double v = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) v += row.normal[j] * s[j];
      if (!(v > row.offset)) return false;
    }
    return true;
  }
};

struct CountView {
  const CountSignal& x;

  std::size_t size() const { return x.size(); }
  double step() const { return x.grid.step; }
  double atom(const CensusAtom& a, std::size_t i) const {
    const double n = x.series(a.subgroup).at(i);
    return a.direction == Direction::Greater ? n - a.threshold : a.threshold - n;
  }
  bool holds(const CensusAtom& a, std::size_t i) const {
    const int n = x.series(a.subgroup).at(i);
    return a.direction == Direction::Greater ? n > a.threshold : n < a.threshold;
  }
};

// Domains -----------------------------------------------------------------------

template <class A>
TimeDomain domain_of(const Formula<A>& f, double step, const TimeDomain& grid) {
  switch (f.op()) {
    case Op::True:
    case Op::Atom:
      return grid;
    case Op::Not:
      return domain_of(f.child(), step, grid);
    case Op::And:
    case Op::Or:
    case Op::Implies: {
      TimeDomain d = grid;
      for (const auto& c : f.children()) d = intersect(d, domain_of(c, step, grid));
      return d;
    }
    case Op::Until:
    case Op::Always:
    case Op::Eventually: {
      TimeDomain d = grid;
      for (const auto& c : f.children()) d = intersect(d, domain_of(c, step, grid));
      if (d.empty()) return d;
      const Offsets h = hull_offsets(f.interval(), step);
      if (h.empty()) return grid;
      return intersect(grid, TimeDomain{d.first - h.lo, d.last - h.hi});
    }
  }
  return {};
}

TimeDomain grid_domain(std::size_t n) { return TimeDomain{0, static_cast<Index>(n) - 1}; }

struct Window {
  Index lo;
  Index hi;
};

Window clip(Index t, const Offsets& o, std::size_t n) {
  return {std::max<Index>(0, t + o.lo), std::min<Index>(static_cast<Index>(n) - 1, t + o.hi)};
}

// Pointwise evaluators ------------------------------------------------------------

template <class A, class View>
double rob_at(const Formula<A>& f, const View& x, Index t) {
  switch (f.op()) {
    case Op::True:
      return kInf;
    case Op::Atom:
      return x.atom(f.atom(), static_cast<std::size_t>(t));
    case Op::Not:
      return -rob_at(f.child(), x, t);
    case Op::And: {
      double r = kInf;
      for (const auto& c : f.children()) r = std::min(r, rob_at(c, x, t));
      return r;
    }
    case Op::Or: {
      double r = -kInf;
      for (const auto& c : f.children()) r = std::max(r, rob_at(c, x, t));
      return r;
    }
    case Op::Implies:
      return std::max(-rob_at(f.child(0), x, t), rob_at(f.child(1), x, t));
    case Op::Always:
    case Op::Eventually: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      const bool is_min = f.op() == Op::Always;
      double r = is_min ? kInf : -kInf;
      if (o.empty()) return r;
      const Window w = clip(t, o, x.size());
      for (Index j = w.lo; j <= w.hi; ++j) {
        const double v = rob_at(f.child(), x, j);
        r = is_min ? std::min(r, v) : std::max(r, v);
      }
      return r;
    }
    case Op::Until: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      double best = -kInf;
      if (o.empty()) return best;
      const Window w = clip(t, o, x.size());
      double prefix = kInf;
      for (Index j = w.lo; j <= w.hi; ++j) {
        best = std::max(best, std::min(rob_at(f.child(1), x, j), prefix));
        prefix = std::min(prefix, rob_at(f.child(0), x, j));
      }
      return best;
    }
  }
  return 0.0;
}

template <class A, class View>
bool holds_at(const Formula<A>& f, const View& x, Index t) {
  switch (f.op()) {
    case Op::True:
      return true;
    case Op::Atom:
      return x.holds(f.atom(), static_cast<std::size_t>(t));
    case Op::Not:
      return !holds_at(f.child(), x, t);
    case Op::And:
      for (const auto& c : f.children()) {
        if (!holds_at(c, x, t)) return false;
      }
      return true;
    case Op::Or:
      for (const auto& c : f.children()) {
        if (holds_at(c, x, t)) return true;
      }
      return false;
    case Op::Implies:
      return !holds_at(f.child(0), x, t) || holds_at(f.child(1), x, t);
    case Op::Always:
    case Op::Eventually: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      const bool all = f.op() == Op::Always;
      if (o.empty()) return all;
      const Window w = clip(t, o, x.size());
      for (Index j = w.lo; j <= w.hi; ++j) {
        if (holds_at(f.child(), x, j) != all) return !all;
      }
      return all;
    }
    case Op::Until: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      if (o.empty()) return false;
      const Window w = clip(t, o, x.size());
      for (Index j = w.lo; j <= w.hi; ++j) {
        if (holds_at(f.child(1), x, j)) return true;
        if (!holds_at(f.child(0), x, j)) return false;
      }
      return false;
    }
  }
  return false;
}

// Whole-grid evaluators -----------------------------------------------------------

// Sliding min/max over [t+o.lo, t+o.hi] clipped to the grid; O(n) via a monotone deque.
std::vector<double> sliding(const std::vector<double>& v, const Offsets& o, bool take_min) {
  const std::size_t n = v.size();
  std::vector<double> out(n, take_min ? kInf : -kInf);
  if (o.empty()) return out;
  std::deque<Index> dq;
  Index next = 0;
  for (Index t = 0; t < static_cast<Index>(n); ++t) {
    const Window w = clip(t, o, n);
    if (w.lo > w.hi) continue;
    next = std::max(next, w.lo);
    for (; next <= w.hi; ++next) {
      while (!dq.empty() && (take_min ? v[dq.back()] >= v[next] : v[dq.back()] <= v[next])) dq.pop_back();
      dq.push_back(next);
    }
    while (!dq.empty() && dq.front() < w.lo) dq.pop_front();
    out[t] = v[dq.front()];
  }
  return out;
}

template <class A, class View>
std::vector<double> rob_all(const Formula<A>& f, const View& x) {
  const std::size_t n = x.size();
  switch (f.op()) {
    case Op::True:
      return std::vector<double>(n, kInf);
    case Op::Atom: {
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = x.atom(f.atom(), i);
      return out;
    }
    case Op::Not: {
      auto out = rob_all(f.child(), x);
      for (auto& v : out) v = -v;
      return out;
    }
    case Op::And:
    case Op::Or: {
      const bool is_and = f.op() == Op::And;
      auto out = rob_all(f.child(0), x);
      for (std::size_t c = 1; c < f.children().size(); ++c) {
        const auto other = rob_all(f.child(c), x);
        for (std::size_t i = 0; i < n; ++i) {
          out[i] = is_and ? std::min(out[i], other[i]) : std::max(out[i], other[i]);
        }
      }
      return out;
    }
    case Op::Implies: {
      auto out = rob_all(f.child(0), x);
      const auto rhs = rob_all(f.child(1), x);
      for (std::size_t i = 0; i < n; ++i) out[i] = std::max(-out[i], rhs[i]);
      return out;
    }
    case Op::Always:
    case Op::Eventually:
      return sliding(rob_all(f.child(), x), exact_offsets(f.interval(), x.step()), f.op() == Op::Always);
    case Op::Until: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      std::vector<double> out(n, -kInf);
      if (o.empty()) return out;
      const auto lhs = rob_all(f.child(0), x);
      const auto rhs = rob_all(f.child(1), x);
      for (Index t = 0; t < static_cast<Index>(n); ++t) {
        const Window w = clip(t, o, n);
        double best = -kInf;
        double prefix = kInf;
        for (Index j = w.lo; j <= w.hi; ++j) {
          best = std::max(best, std::min(rhs[j], prefix));
          prefix = std::min(prefix, lhs[j]);
        }
        out[t] = best;
      }
      return out;
    }
  }
  return {};
}

template <class A, class View>
std::vector<bool> holds_all(const Formula<A>& f, const View& x) {
  const std::size_t n = x.size();
  switch (f.op()) {
    case Op::True:
      return std::vector<bool>(n, true);
    case Op::Atom: {
      std::vector<bool> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = x.holds(f.atom(), i);
      return out;
    }
    case Op::Not: {
      auto out = holds_all(f.child(), x);
      out.flip();
      return out;
    }
    case Op::And:
    case Op::Or: {
      const bool is_and = f.op() == Op::And;
      auto out = holds_all(f.child(0), x);
      for (std::size_t c = 1; c < f.children().size(); ++c) {
        const auto other = holds_all(f.child(c), x);
        for (std::size_t i = 0; i < n; ++i) out[i] = is_and ? (out[i] && other[i]) : (out[i] || other[i]);
      }
      return out;
    }
    case Op::Implies: {
      auto out = holds_all(f.child(0), x);
      const auto rhs = holds_all(f.child(1), x);
      for (std::size_t i = 0; i < n; ++i) out[i] = !out[i] || rhs[i];
      return out;
    }
    case Op::Always:
    case Op::Eventually: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      const bool all = f.op() == Op::Always;
      std::vector<bool> out(n, all);
      if (o.empty()) return out;
      const auto v = holds_all(f.child(), x);
      std::vector<std::size_t> prefix(n + 1, 0);
      for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (v[i] ? 1 : 0);
      for (Index t = 0; t < static_cast<Index>(n); ++t) {
        const Window w = clip(t, o, n);
        if (w.lo > w.hi) continue;
        const std::size_t count = prefix[w.hi + 1] - prefix[w.lo];
        out[t] = all ? count == static_cast<std::size_t>(w.hi - w.lo + 1) : count > 0;
      }
      return out;
    }
    case Op::Until: {
      const Offsets o = exact_offsets(f.interval(), x.step());
      std::vector<bool> out(n, false);
      if (o.empty()) return out;
      const auto lhs = holds_all(f.child(0), x);
      const auto rhs = holds_all(f.child(1), x);
      for (Index t = 0; t < static_cast<Index>(n); ++t) {
        const Window w = clip(t, o, n);
        for (Index j = w.lo; j <= w.hi; ++j) {
          if (rhs[j]) {
            out[t] = true;
            break;
          }
          if (!lhs[j]) break;
        }
      }
      return out;
    }
  }
  return {};
}

template <class A>
double length_of(const Formula<A>& f) {
  double longest = 0.0;
  for (const auto& c : f.children()) longest = std::max(longest, length_of(c));
  if (f.is_temporal()) {
    if (f.interval().lo < 0.0) throw StlError("necessary length needs non-negative interval bounds");
    longest += f.interval().hi;
  }
  return longest;
}

template <class A, class View>
void require_in_domain(const Formula<A>& f, const View& x, std::size_t t) {
  const TimeDomain d = domain_of(f, x.step(), grid_domain(x.size()));
  if (!d.contains(static_cast<Index>(t))) {
    throw StlError("time index " + std::to_string(t) + " is outside the formula's time domain");
  }
}

template <class T>
std::vector<T> slice(const std::vector<T>& v, const TimeDomain& d) {
  if (d.empty()) return {};
  return std::vector<T>(v.begin() + d.first, v.begin() + d.last + 1);
}

}  // namespace

Offsets exact_offsets(const Interval& interval, double step) {
  const double lo = interval.lo / step;
  const double hi = interval.hi / step;
  Offsets o;
  o.lo = static_cast<Index>(interval.lo_closed ? std::ceil(lo - kSnap) : std::floor(lo + kSnap) + 1);
  o.hi = static_cast<Index>(interval.hi_closed ? std::floor(hi + kSnap) : std::ceil(hi - kSnap) - 1);
  return o;
}

Offsets hull_offsets(const Interval& interval, double step) {
  return {static_cast<Index>(std::ceil(interval.lo / step - kSnap)),
          static_cast<Index>(std::floor(interval.hi / step + kSnap))};
}

TimeDomain intersect(const TimeDomain& a, const TimeDomain& b) {
  if (a.empty() || b.empty()) return {};
  return {std::max(a.first, b.first), std::min(a.last, b.last)};
}

const std::vector<int>& CountSignal::series(std::string_view subgroup) const {
  for (std::size_t i = 0; i < subgroups.size(); ++i) {
    if (subgroups[i] == subgroup) return counts.at(i);
  }
  throw StlError("unknown subgroup '" + std::string(subgroup) + "'");
}

TimeDomain time_domain(const InnerFormula& phi, const TimeGrid& grid) {
  return domain_of(phi, grid.step, grid_domain(grid.num_points));
}

TimeDomain time_domain(const OuterFormula& phi, const TimeGrid& grid) {
  return domain_of(phi, grid.step, grid_domain(grid.num_points));
}

double robustness(const InnerFormula& phi, const Trajectory& x, std::size_t t) {
  const TrajectoryView view{x};
  require_in_domain(phi, view, t);
  return rob_at(phi, view, static_cast<Index>(t));
}

double robustness(const OuterFormula& phi, const CountSignal& x, std::size_t t) {
  const CountView view{x};
  require_in_domain(phi, view, t);
  return rob_at(phi, view, static_cast<Index>(t));
}

bool eval_boolean(const InnerFormula& phi, const Trajectory& x, std::size_t t) {
  const TrajectoryView view{x};
  require_in_domain(phi, view, t);
  return holds_at(phi, view, static_cast<Index>(t));
}

bool eval_boolean(const OuterFormula& phi, const CountSignal& x, std::size_t t) {
  const CountView view{x};
  require_in_domain(phi, view, t);
  return holds_at(phi, view, static_cast<Index>(t));
}

std::vector<double> robustness_series(const InnerFormula& phi, const Trajectory& x) {
  const TimeDomain d = time_domain(phi, x.grid());
  if (d.empty()) return {};
  return slice(rob_all(phi, TrajectoryView{x}), d);
}

std::vector<double> robustness_series(const OuterFormula& phi, const CountSignal& x) {
  const TimeDomain d = time_domain(phi, x.grid);
  if (d.empty()) return {};
  return slice(rob_all(phi, CountView{x}), d);
}

std::vector<bool> eval_series(const InnerFormula& phi, const Trajectory& x) {
  const TimeDomain d = time_domain(phi, x.grid());
  if (d.empty()) return {};
  return slice(holds_all(phi, TrajectoryView{x}), d);
}

std::vector<bool> eval_series(const OuterFormula& phi, const CountSignal& x) {
  const TimeDomain d = time_domain(phi, x.grid);
  if (d.empty()) return {};
  return slice(holds_all(phi, CountView{x}), d);
}

double necessary_length(const InnerFormula& phi) { return length_of(phi); }
double necessary_length(const OuterFormula& phi) { return length_of(phi); }

}  // namespace censtl::stl
