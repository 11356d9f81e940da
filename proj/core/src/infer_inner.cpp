#include "censtl/infer_inner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

#include "censtl/format.hpp"

namespace censtl::inner {

using stl::InnerFormula;
using stl::Interval;

TaskTemplate TaskTemplate::predicate(std::size_t slot) { return {TemplateKind::Predicate, slot, {}}; }

TaskTemplate TaskTemplate::sequential(std::vector<TaskTemplate> subtasks) {
  if (subtasks.size() < 2) throw InnerError("a sequential template needs at least two subtasks");
  return {TemplateKind::Sequential, 0, std::move(subtasks)};
}

TaskTemplate TaskTemplate::concurrent(std::vector<TaskTemplate> subtasks) {
  if (subtasks.empty()) throw InnerError("a concurrent template needs at least one subtask");
  return {TemplateKind::Concurrent, 0, std::move(subtasks)};
}

TaskTemplate TaskTemplate::persistent(TaskTemplate subtask) {
  return {TemplateKind::Persistent, 0, {std::move(subtask)}};
}

TaskTemplate TaskTemplate::causal(TaskTemplate cause, TaskTemplate effect) {
  return {TemplateKind::Causal, 0, {std::move(cause), std::move(effect)}};
}

// Template text ------------------------------------------------------------------

namespace {

class TemplateReader {
 public:
  explicit TemplateReader(std::string_view text) : text_(text) {}

  TaskTemplate read() {
    TaskTemplate t = node();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  TaskTemplate node() {
    skip();
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    const std::string word(text_.substr(pos_, end - pos_));
    if (word.empty()) fail("expected a template name or predicate slot");
    pos_ = end;
    if (word.size() > 1 && word[0] == 'p' &&
        std::all_of(word.begin() + 1, word.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return TaskTemplate::predicate(std::stoul(word.substr(1)));
    }
    expect('(');
    std::vector<TaskTemplate> args{node()};
    skip();
    while (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      args.push_back(node());
      skip();
    }
    expect(')');
    if (word == "seq") return TaskTemplate::sequential(std::move(args));
    if (word == "conc") return TaskTemplate::concurrent(std::move(args));
    if (word == "persist") {
      if (args.size() != 1) fail("persist takes one subtask");
      return TaskTemplate::persistent(std::move(args[0]));
    }
    if (word == "causal") {
      if (args.size() != 2) fail("causal takes a cause and an effect");
      return TaskTemplate::causal(std::move(args[0]), std::move(args[1]));
    }
    fail("unknown template '" + word + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw InnerError("template position " + std::to_string(pos_) + ": " + message);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_slots(const TaskTemplate& t, std::set<std::size_t>& slots) {
  if (t.kind == TemplateKind::Predicate) slots.insert(t.slot);
  for (const auto& c : t.children) collect_slots(c, slots);
}

std::size_t own_params(const TaskTemplate& t) {
  switch (t.kind) {
    case TemplateKind::Predicate:
      return 0;
    case TemplateKind::Sequential:
      return 1 + 3 * (t.children.size() - 1);
    case TemplateKind::Concurrent:
    case TemplateKind::Causal:
      return 1;
    case TemplateKind::Persistent:
      return 2;
  }
  return 0;
}

bool zero(double v) { return v == 0.0; }

}  // namespace

TaskTemplate parse_template(std::string_view text) { return TemplateReader(text).read(); }

std::string format_template(const TaskTemplate& t) {
  if (t.kind == TemplateKind::Predicate) return "p" + std::to_string(t.slot);
  std::string name;
  switch (t.kind) {
    case TemplateKind::Sequential:
      name = "seq";
      break;
    case TemplateKind::Concurrent:
      name = "conc";
      break;
    case TemplateKind::Persistent:
      name = "persist";
      break;
    case TemplateKind::Causal:
      name = "causal";
      break;
    case TemplateKind::Predicate:
      break;
  }
  std::string s = name + "(";
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i > 0) s += ",";
    s += format_template(t.children[i]);
  }
  return s + ")";
}

std::size_t predicate_slots(const TaskTemplate& t) {
  std::set<std::size_t> slots;
  collect_slots(t, slots);
  if (slots.empty()) throw InnerError("template has no predicate slots");
  if (*slots.rbegin() + 1 != slots.size()) throw InnerError("predicate slots must be numbered p0..p(n-1)");
  return slots.size();
}

std::size_t temporal_param_count(const TaskTemplate& t) {
  std::size_t n = own_params(t);
  for (const auto& c : t.children) n += temporal_param_count(c);
  return n;
}

bool is_nested(const TaskTemplate& t) {
  for (const auto& c : t.children) {
    if (c.kind != TemplateKind::Predicate) return true;
  }
  return false;
}

// Instantiation -------------------------------------------------------------------

namespace {

struct Builder {
  std::span<const double> taus;
  const std::vector<geometry::HalfPlanePredicate>& predicates;
  std::size_t next = 0;

  double take() {
    if (next >= taus.size()) throw InnerError("too few temporal parameters for the template");
    const double v = taus[next++];
    if (!std::isfinite(v) || v < 0.0) throw InnerError("temporal parameters must be finite and non-negative");
    return v;
  }

  InnerFormula build(const TaskTemplate& t) {
    switch (t.kind) {
      case TemplateKind::Predicate:
        if (t.slot >= predicates.size()) throw InnerError("no predicate for slot p" + std::to_string(t.slot));
        return InnerFormula::atom(stl::PredicateAtom{"", predicates[t.slot]});
      case TemplateKind::Sequential: {
        const double t1 = take();
        if (zero(t1)) throw InnerError("sequential: the first window G[0,t1) is empty");
        std::vector<double> params;
        for (std::size_t i = 1; i < t.children.size(); ++i) {
          params.push_back(take());
          params.push_back(take());
          params.push_back(take());
        }
        std::vector<InnerFormula> terms{InnerFormula::always(Interval::closed_open(0.0, t1), build(t.children[0]))};
        double previous_end = t1;
        for (std::size_t i = 1; i < t.children.size(); ++i) {
          const double a = params[3 * (i - 1)];
          const double b = params[3 * (i - 1) + 1];
          const double c = params[3 * (i - 1) + 2];
          const std::string which = "sequential subtask " + std::to_string(i + 1);
          if (a < previous_end) {
            throw InnerError(which + ": start " + format_double(a) + " precedes the previous subtask end " +
                             format_double(previous_end));
          }
          if (b < a) throw InnerError(which + ": window end precedes its start");
          if (a == b && zero(c)) throw InnerError(which + ": both windows are empty");
          InnerFormula sub = build(t.children[i]);
          if (a == b) {
            terms.push_back(InnerFormula::always(Interval::closed_open(a, a + c), std::move(sub)));
          } else if (zero(c)) {
            terms.push_back(InnerFormula::eventually(Interval::closed_open(a, b), std::move(sub)));
          } else {
            terms.push_back(InnerFormula::eventually(
                Interval::closed_open(a, b), InnerFormula::always(Interval::closed_open(0.0, c), std::move(sub))));
          }
          previous_end = b + c;
        }
        return InnerFormula::conj(std::move(terms));
      }
      case TemplateKind::Concurrent: {
        const double t1 = take();
        if (zero(t1)) throw InnerError("concurrent: the window G[0,t1) is empty");
        std::vector<InnerFormula> subs;
        for (const auto& c : t.children) subs.push_back(build(c));
        return InnerFormula::always(Interval::closed_open(0.0, t1), InnerFormula::disj(std::move(subs)));
      }
      case TemplateKind::Persistent: {
        const double t1 = take();
        const double t2 = take();
        if (zero(t1) || zero(t2)) throw InnerError("persistent: windows must be non-empty");
        return InnerFormula::always(Interval::closed_open(0.0, t1),
                                    InnerFormula::eventually(Interval::closed_open(0.0, t2), build(t.children[0])));
      }
      case TemplateKind::Causal: {
        const double t1 = take();
        if (zero(t1)) throw InnerError("causal: the window G[0,t1) is empty");
        auto cause = build(t.children[0]);
        auto effect = build(t.children[1]);
        return InnerFormula::always(Interval::closed_open(0.0, t1),
                                    InnerFormula::implies(std::move(cause), std::move(effect)));
      }
    }
    return {};
  }
};

struct GapReader {
  std::span<const double> gaps;
  std::vector<double> taus;
  std::size_t next = 0;

  double take() {
    if (next >= gaps.size()) throw InnerError("too few temporal parameters for the template");
    return gaps[next++];
  }

  void walk(const TaskTemplate& t) {
    if (t.kind == TemplateKind::Sequential) {
      const double t1 = take();
      taus.push_back(t1);
      double previous_end = t1;
      for (std::size_t i = 1; i < t.children.size(); ++i) {
        const double a = previous_end + take();
        const double b = a + take();
        const double c = take();
        taus.insert(taus.end(), {a, b, c});
        previous_end = b + c;
      }
    } else {
      for (std::size_t i = 0; i < own_params(t); ++i) taus.push_back(take());
    }
    for (const auto& c : t.children) walk(c);
  }
};

// Own-parameter lower bounds, in units of the sample step.
void lower_bounds(const TaskTemplate& t, std::vector<double>& out) {
  switch (t.kind) {
    case TemplateKind::Predicate:
      break;
    case TemplateKind::Sequential:
      out.push_back(1.0);
      for (std::size_t i = 1; i < t.children.size(); ++i) out.insert(out.end(), {0.0, 0.0, 0.0});
      break;
    case TemplateKind::Concurrent:
    case TemplateKind::Causal:
      out.push_back(1.0);
      break;
    case TemplateKind::Persistent:
      out.insert(out.end(), {1.0, 1.0});
      break;
  }
  for (const auto& c : t.children) lower_bounds(c, out);
}

double offset_bound(const geometry::Box& b) {
  return std::max({std::hypot(b.xmin, b.ymin), std::hypot(b.xmin, b.ymax), std::hypot(b.xmax, b.ymin),
                   std::hypot(b.xmax, b.ymax)});
}

InnerFormula build_formula(const TaskTemplate& t, std::span<const double> taus,
                           const std::vector<geometry::HalfPlanePredicate>& predicates) {
  Builder b{taus, predicates};
  InnerFormula f = b.build(t);
  if (b.next != taus.size()) throw InnerError("too many temporal parameters for the template");
  return f;
}

}  // namespace

Instantiated instantiate(const TaskTemplate& t, std::span<const double> taus,
                         std::vector<geometry::HalfPlanePredicate> predicates) {
  if (predicates.size() != predicate_slots(t)) {
    throw InnerError("template needs " + std::to_string(predicate_slots(t)) + " predicates, got " +
                     std::to_string(predicates.size()));
  }
  Instantiated out;
  out.phi_t = build_formula(t, taus, predicates);
  out.length = stl::necessary_length(out.phi_t);
  out.phi = InnerFormula::eventually(Interval::closed(-out.length, 0.0), out.phi_t);
  out.taus.assign(taus.begin(), taus.end());
  out.predicates = std::move(predicates);
  return out;
}

std::vector<double> gaps_to_taus(const TaskTemplate& t, std::span<const double> gaps) {
  GapReader r{gaps, {}};
  r.walk(t);
  if (r.next != gaps.size()) throw InnerError("too many temporal parameters for the template");
  return r.taus;
}

pso::SearchSpace search_space(const TaskTemplate& t, const InnerConfig& cfg, std::size_t dimension, double step) {
  if (dimension < 2) throw InnerError("learned predicates need an observation dimension of at least 2");
  if (!(cfg.tau_limit >= step)) throw InnerError("tau_limit must be at least one sample step");
  if (cfg.halfplanes == 0) throw InnerError("predicates need at least one half-plane");
  pso::SearchSpace space;
  std::vector<double> lows;
  lower_bounds(t, lows);
  for (const double lo : lows) space.add_grid(lo * step, cfg.tau_limit, step);
  const double r = offset_bound(cfg.bbox);
  const std::size_t slots = predicate_slots(t);
  for (std::size_t s = 0; s < slots; ++s) {
    for (std::size_t k = 0; k < cfg.halfplanes; ++k) {
      for (std::size_t j = 0; j + 1 < dimension; ++j) space.add_continuous(-std::numbers::pi, std::numbers::pi);
      space.add_continuous(-r, r);
    }
  }
  return space;
}

Instantiated decode(const TaskTemplate& t, std::span<const double> alpha, const InnerConfig& cfg,
                    std::size_t dimension) {
  const std::size_t nt = temporal_param_count(t);
  const std::size_t slots = predicate_slots(t);
  const std::size_t per_row = dimension;
  if (alpha.size() != nt + slots * cfg.halfplanes * per_row) {
    throw InnerError("parameter vector has " + std::to_string(alpha.size()) + " entries, expected " +
                     std::to_string(nt + slots * cfg.halfplanes * per_row));
  }
  const auto taus = gaps_to_taus(t, alpha.first(nt));
  std::vector<geometry::HalfPlanePredicate> predicates;
  std::size_t i = nt;
  for (std::size_t s = 0; s < slots; ++s) {
    geometry::TrigParams params;
    for (std::size_t k = 0; k < cfg.halfplanes; ++k) {
      geometry::TrigRow row;
      row.angles.assign(alpha.begin() + static_cast<std::ptrdiff_t>(i),
                        alpha.begin() + static_cast<std::ptrdiff_t>(i + dimension - 1));
      row.offset = alpha[i + dimension - 1];
      i += per_row;
      params.push_back(std::move(row));
    }
    predicates.push_back(geometry::trig_to_halfplane(params));
  }
  return instantiate(t, taus, std::move(predicates));
}

// Starting positions for the warm part of the swarm. Predicate rows are the a
// priori polygon edges; the first particle uses one-step windows and the rest
// keep their uniform temporal draw.
std::vector<std::vector<double>> warm_positions(const TaskTemplate& t, const InnerConfig& cfg, std::size_t dimension,
                                                std::size_t size, double step) {
  const auto count = static_cast<std::size_t>(std::floor(cfg.warm_start * static_cast<double>(cfg.pso.num_particles)));
  if (count == 0 || dimension != 2) return {};
  std::vector<double> x(size, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> lows;
  lower_bounds(t, lows);
  std::size_t i = lows.size();
  for (const auto& region : cfg.apriori) {
    if (region.vertices.size() >= 3 && region.vertices.size() <= cfg.halfplanes) {
      const auto rows = geometry::polygon_to_predicate(region).rows();
      for (std::size_t k = 0; k < cfg.halfplanes; ++k) {
        const auto& row = rows[std::min(k, rows.size() - 1)];
        x[i + 2 * k] = std::atan2(row.normal[1], row.normal[0]);
        x[i + 2 * k + 1] = row.offset;
      }
    }
    i += 2 * cfg.halfplanes;
  }
  std::vector<std::vector<double>> out(std::min(count, cfg.pso.num_particles), x);
  for (std::size_t j = 0; j < lows.size(); ++j) out[0][j] = std::max(lows[j], 1.0) * step;
  return out;
}

double region_distance(const geometry::Polygon& apriori, const geometry::HalfPlanePredicate& learned,
                       const geometry::Box& bbox) {
  const auto polygon = geometry::enumerate_vertices(learned, bbox);
  if (polygon.empty()) return 2.0 * bbox.diagonal();
  return geometry::hausdorff(apriori, polygon);
}

CostBreakdown cost_jstl(const Instantiated& candidate, const Dataset& data, const InnerConfig& cfg) {
  if (candidate.predicates.size() != cfg.apriori.size()) {
    throw InnerError("template has " + std::to_string(candidate.predicates.size()) + " predicates but " +
                     std::to_string(cfg.apriori.size()) + " a priori regions are configured");
  }
  CostBreakdown c;
  for (std::size_t i = 0; i < cfg.apriori.size(); ++i) {
    c.hausdorff.push_back(region_distance(cfg.apriori[i], candidate.predicates[i], cfg.bbox));
    c.specificity += c.hausdorff.back();
  }
  c.penalty = kLengthPenalty * std::max(0.0, candidate.length - cfg.tau_limit);

  bool evaluable = true;
  for (std::size_t q = 0; q < data.num_sessions() && evaluable; ++q) {
    evaluable = stl::time_domain(candidate.phi, data.grid(q)).size() >= 2;
  }
  if (evaluable) {
    const auto sig = census::signatures(candidate.phi, data);
    census::AgentSet everyone(data.num_agents());
    for (std::size_t k = 0; k < everyone.size(); ++k) everyone[k] = k;
    c.consistency = census::variation(sig, everyone);
    for (std::size_t k = 0; k < data.num_agents(); ++k) {
      c.frequency += static_cast<double>(census::frequency(sig, k));
    }
  } else {
    c.penalty += kInfeasiblePenalty;
  }
  c.total = c.consistency - cfg.lambda1 * c.frequency + cfg.lambda2 * c.specificity + c.penalty;
  return c;
}

InnerResult infer_inner(const Dataset& data, const TaskTemplate& t, const InnerConfig& cfg) {
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0) throw InnerError("objective weights must be non-negative");
  if (!(cfg.tau_limit > 0.0)) throw InnerError("tau_limit must be positive");
  if (is_nested(t) && !cfg.allow_nesting) throw InnerError("nested templates are disabled by configuration");
  if (cfg.apriori.size() != predicate_slots(t)) {
    throw InnerError("template has " + std::to_string(predicate_slots(t)) + " predicate slots but " +
                     std::to_string(cfg.apriori.size()) + " a priori regions are configured");
  }
  if (!(cfg.bbox.xmin < cfg.bbox.xmax && cfg.bbox.ymin < cfg.bbox.ymax)) {
    throw InnerError("bounding box must have positive area");
  }
  const double step = data.grid(0).step;
  for (std::size_t q = 1; q < data.num_sessions(); ++q) {
    if (std::abs(data.grid(q).step - step) > 1e-9 * step) throw InnerError("sessions must share one sample step");
  }
  const std::size_t w = data.dimension();
  const auto space = search_space(t, cfg, w, step);

  auto cost = [&](std::span<const double> alpha) {
    try {
      return cost_jstl(decode(t, alpha, cfg, w), data, cfg).total;
    } catch (const InnerError&) {
      return kInfeasiblePenalty;
    }
  };

  InnerResult result;
  if (cfg.warm_start < 0.0 || cfg.warm_start > 1.0) throw InnerError("warm_start must lie in [0, 1]");
  result.search = pso::optimize(cost, space, cfg.pso, {}, warm_positions(t, cfg, w, space.size(), step));
  result.alpha = result.search.best_params;
  result.best = decode(t, result.alpha, cfg, w);
  result.cost = cost_jstl(result.best, data, cfg);
  if (result.cost.penalty > 0.0) {
    throw InnerError("no feasible inner formula found (necessary length " + format_double(result.best.length) +
                     " vs limit " + format_double(cfg.tau_limit) + ")");
  }
  return result;
}

void write_inner_report(const InnerResult& result, const InnerConfig& cfg, std::ostream& out) {
  out << "formula,lambda1,lambda2,necessary_length,consistency,frequency,specificity";
  for (std::size_t i = 0; i < result.cost.hausdorff.size(); ++i) out << ",hausdorff_" << (i + 1);
  out << ",cost,alpha\n";
  out << '"' << stl::format_formula(result.best.phi) << '"' << ',' << format_double(cfg.lambda1) << ','
      << format_double(cfg.lambda2) << ',' << format_double(result.best.length) << ','
      << format_double(result.cost.consistency) << ',' << format_double(result.cost.frequency) << ','
      << format_double(result.cost.specificity);
  for (const double h : result.cost.hausdorff) out << ',' << format_double(h);
  out << ',' << format_double(result.cost.total) << ",\"";
  for (std::size_t i = 0; i < result.alpha.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_double(result.alpha[i]);
  }
  out << "\"\n";
}

}  // namespace censtl::inner
