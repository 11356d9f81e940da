#include "censtl/infer_outer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>

#include "censtl/format.hpp"
#include "censtl/parallel.hpp"

namespace censtl::outer {

using stl::CountSignal;
using stl::Interval;
using stl::OuterFormula;

namespace {

constexpr std::array<OuterTemplateKind, 8> kAll = {
    OuterTemplateKind::InstDur,  OuterTemplateKind::InstEvent,   OuterTemplateKind::InstEventDur,
    OuterTemplateKind::InstPersist, OuterTemplateKind::DurDur,   OuterTemplateKind::DurEvent,
    OuterTemplateKind::DurEventDur, OuterTemplateKind::DurPersist};

constexpr std::array<std::string_view, 8> kNames = {"InstDur", "InstEvent",  "InstEventDur", "InstPersist",
                                                    "DurDur",  "DurEvent",   "DurEventDur",  "DurPersist"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

OuterFormula greater(const std::string& s, int c) {
  return OuterFormula::atom({s, stl::Direction::Greater, c});
}

OuterFormula static_part(const RelationshipAtoms& atoms, bool cause) {
  if (atoms.relationship == Relationship::Similarity) {
    return cause ? greater(atoms.cause, atoms.cause_threshold) : greater(atoms.effect, atoms.effect_threshold);
  }
  const auto& bounds = cause ? atoms.cause_bounds : atoms.effect_bounds;
  if (bounds.empty()) throw OuterError("complementarity atoms need at least one bound per side");
  std::vector<OuterFormula> terms;
  for (const auto& b : bounds) {
    terms.push_back(greater(b.subgroup, b.lower));
    terms.push_back(OuterFormula::atom({b.subgroup, stl::Direction::Less, b.upper}));
  }
  return OuterFormula::conj(std::move(terms));
}

void check_thresholds(const RelationshipAtoms& atoms) {
  auto bad = [](int c) { return c < 0; };
  if (atoms.relationship == Relationship::Similarity) {
    if (bad(atoms.cause_threshold) || bad(atoms.effect_threshold)) {
      throw OuterError("census thresholds must be non-negative");
    }
    return;
  }
  for (const auto* side : {&atoms.cause_bounds, &atoms.effect_bounds}) {
    for (const auto& b : *side) {
      if (bad(b.lower) || bad(b.upper)) throw OuterError("census thresholds must be non-negative");
    }
  }
}

std::vector<std::size_t> evaluable(const OuterFormula& f, const CountSignal& s, stl::TimeDomain& dom) {
  dom = stl::time_domain(f, s.grid);
  std::vector<std::size_t> out;
  if (dom.empty()) return out;
  const auto bits = stl::eval_series(f, s);
  out.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out.push_back(bits[i] ? 1 : 0);
  return out;
}

// Search problem for one template and one subgroup choice.
struct Problem {
  std::span<const CountSignal> census;
  std::vector<Subgroup> cause;
  std::vector<Subgroup> effect;
  Relationship relationship;
  OuterTemplateKind kind;
  double tc = 0.0;
  double step = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::size_t num_taus = 0;

  pso::SearchSpace space() const {
    pso::SearchSpace sp;
    const bool dur = durational_cause(kind);
    for (std::size_t i = 0; i < num_taus; ++i) {
      // Zero is allowed only for the first offset of the effect window.
      const bool zero_ok = dur ? i == 1 : i == 0;
      sp.add_grid(zero_ok ? 0.0 : step, std::max(tc, step), step);
    }
    if (relationship == Relationship::Similarity) {
      sp.add_grid(0.0, cause[0].size, 1.0);
      sp.add_grid(0.0, effect[0].size, 1.0);
    } else {
      for (const auto* side : {&cause, &effect}) {
        for (const auto& g : *side) {
          sp.add_grid(0.0, g.size, 1.0);
          sp.add_grid(0.0, g.size, 1.0);
        }
      }
    }
    return sp;
  }

  std::vector<double> taus(std::span<const double> beta) const {
    std::vector<double> t(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(num_taus));
    // The effect window end is searched as a positive width.
    const std::size_t end = durational_cause(kind) ? 2 : 1;
    t[end] += t[end - 1];
    return t;
  }

  RelationshipAtoms atoms(std::span<const double> beta) const {
    auto as_int = [](double v) { return static_cast<int>(std::lround(v)); };
    std::size_t k = num_taus;
    if (relationship == Relationship::Similarity) {
      return RelationshipAtoms::similarity(cause[0].name, as_int(beta[k]), effect[0].name, as_int(beta[k + 1]));
    }
    std::vector<CountBound> cb;
    std::vector<CountBound> eb;
    for (const auto& g : cause) {
      cb.push_back({g.name, as_int(beta[k]), as_int(beta[k + 1])});
      k += 2;
    }
    for (const auto& g : effect) {
      eb.push_back({g.name, as_int(beta[k]), as_int(beta[k + 1])});
      k += 2;
    }
    return RelationshipAtoms::complementarity(std::move(cb), std::move(eb));
  }

  bool feasible(const RelationshipAtoms& a) const {
    if (a.relationship == Relationship::Similarity) return true;
    for (const auto* side : {&a.cause_bounds, &a.effect_bounds}) {
      for (const auto& b : *side) {
        if (b.upper - b.lower <= 1) return false;
      }
    }
    return true;
  }

  // Returns std::nullopt when beta does not give a valid formula.
  std::optional<Candidate> build(std::span<const double> beta) const {
    Candidate c;
    c.tmpl = {kind, taus(beta)};
    c.atoms = atoms(beta);
    try {
      c.instance = instantiate_outer(c.tmpl, c.atoms, tc);
    } catch (const OuterError&) {
      return std::nullopt;
    }
    c.acc = accuracy(c.instance.cause, c.instance.effect, census);
    c.objective = objective(c.acc, c.atoms, lambda1, lambda2);
    c.span = stl::necessary_length(OuterFormula::implies(c.instance.cause, c.instance.effect));
    return c;
  }

  double cost(std::span<const double> beta) const {
    const auto c = build(beta);
    return c ? c->objective : kInvalidPenalty;
  }
};

Problem make_problem(std::span<const CountSignal> census, std::span<const Subgroup> subgroups,
                     Relationship relationship, OuterTemplateKind kind, std::pair<std::size_t, std::size_t> pair,
                     const OuterConfig& cfg) {
  if (census.empty()) throw OuterError("outer inference needs at least one census session");
  if (subgroups.empty()) throw OuterError("outer inference needs at least one subgroup");
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0) throw OuterError("outer weights must be non-negative");
  Problem p;
  p.census = census;
  p.relationship = relationship;
  p.kind = kind;
  p.tc = census_length(census);
  p.step = census.front().grid.step;
  p.lambda1 = cfg.lambda1;
  p.lambda2 = cfg.lambda2;
  p.num_taus = tau_count(kind);
  for (const auto& s : census) {
    if (std::abs(s.grid.step - p.step) > 1e-9 * std::max(1.0, p.step)) {
      throw OuterError("census sessions must share one sampling step");
    }
    for (const auto& g : subgroups) (void)s.series(g.name);
  }
  if (relationship == Relationship::Similarity) {
    if (pair.first >= subgroups.size() || pair.second >= subgroups.size()) {
      throw OuterError("subgroup pair out of range");
    }
    p.cause = {subgroups[pair.first]};
    p.effect = {subgroups[pair.second]};
  } else {
    p.cause.assign(subgroups.begin(), subgroups.end());
    p.effect = p.cause;
  }
  return p;
}

Candidate finalize(const Problem& p, std::span<const double> beta) {
  auto c = p.build(beta);
  if (!c || !p.feasible(c->atoms)) {
    throw OuterError(std::string("no feasible ") + std::string(template_name(p.kind)) + " formula");
  }
  return *c;
}

}  // namespace

std::span<const OuterTemplateKind> all_outer_templates() { return kAll; }

std::string_view template_name(OuterTemplateKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

OuterTemplateKind parse_template_kind(std::string_view name) {
  const std::string key = lower(trim(name));
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (lower(kNames[i]) == key) return kAll[i];
  }
  throw OuterError("unknown outer template '" + std::string(name) + "'");
}

std::size_t tau_count(OuterTemplateKind kind) {
  switch (kind) {
    case OuterTemplateKind::InstDur:
    case OuterTemplateKind::InstEvent:
      return 2;
    case OuterTemplateKind::InstEventDur:
    case OuterTemplateKind::InstPersist:
    case OuterTemplateKind::DurDur:
    case OuterTemplateKind::DurEvent:
      return 3;
    case OuterTemplateKind::DurEventDur:
    case OuterTemplateKind::DurPersist:
      return 4;
  }
  return 0;
}

bool durational_cause(OuterTemplateKind kind) {
  return kind == OuterTemplateKind::DurDur || kind == OuterTemplateKind::DurEvent ||
         kind == OuterTemplateKind::DurEventDur || kind == OuterTemplateKind::DurPersist;
}

RelationshipAtoms RelationshipAtoms::similarity(std::string cause, int c1, std::string effect, int c2) {
  RelationshipAtoms a;
  a.relationship = Relationship::Similarity;
  a.cause = std::move(cause);
  a.effect = std::move(effect);
  a.cause_threshold = c1;
  a.effect_threshold = c2;
  return a;
}

RelationshipAtoms RelationshipAtoms::complementarity(std::vector<CountBound> cause_bounds,
                                                     std::vector<CountBound> effect_bounds) {
  RelationshipAtoms a;
  a.relationship = Relationship::Complementarity;
  a.cause_bounds = std::move(cause_bounds);
  a.effect_bounds = std::move(effect_bounds);
  return a;
}

OuterInstance instantiate_outer(const OuterTemplate& tmpl, const RelationshipAtoms& atoms, double census_length) {
  const auto& t = tmpl.taus;
  if (t.size() != tau_count(tmpl.kind)) {
    throw OuterError(std::string(template_name(tmpl.kind)) + " takes " + std::to_string(tau_count(tmpl.kind)) +
                     " temporal parameters, got " + std::to_string(t.size()));
  }
  for (double v : t) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw OuterError("temporal parameters must be finite and >= 0");
  }
  check_thresholds(atoms);

  const OuterFormula cs = static_part(atoms, true);
  const OuterFormula es = static_part(atoms, false);
  const bool dur = durational_cause(tmpl.kind);
  // Effect window [a, b) and the optional inner width.
  const double a = dur ? t[1] : t[0];
  const double b = dur ? t[2] : t[1];
  if (!(b > a)) throw OuterError("effect window must have positive length");
  if (dur && !(t[0] > 0.0)) throw OuterError("cause duration must be positive");
  const bool nested = t.size() == (dur ? 4u : 3u);
  const double width = nested ? t.back() : 0.0;
  if (nested && !(width > 0.0)) throw OuterError("inner window must have positive length");

  OuterInstance out;
  out.cause = dur ? OuterFormula::always(Interval::closed_open(0.0, t[0]), cs) : cs;
  const Interval window = Interval::closed_open(a, b);
  switch (tmpl.kind) {
    case OuterTemplateKind::InstDur:
    case OuterTemplateKind::DurDur:
      out.effect = OuterFormula::always(window, es);
      break;
    case OuterTemplateKind::InstEvent:
    case OuterTemplateKind::DurEvent:
      out.effect = OuterFormula::eventually(window, es);
      break;
    case OuterTemplateKind::InstEventDur:
    case OuterTemplateKind::DurEventDur:
      out.effect = OuterFormula::eventually(window, OuterFormula::always(Interval::closed_open(0.0, width), es));
      break;
    case OuterTemplateKind::InstPersist:
    case OuterTemplateKind::DurPersist:
      out.effect = OuterFormula::always(window, OuterFormula::eventually(Interval::closed_open(0.0, width), es));
      break;
  }
  out.horizon = census_length - b - width;
  if (!(out.horizon > 0.0)) {
    throw OuterError("outer horizon " + format_double(out.horizon) + " is not positive for census length " +
                     format_double(census_length));
  }
  out.gamma = OuterFormula::always(Interval::closed_open(0.0, out.horizon),
                                   OuterFormula::implies(out.cause, out.effect));
  return out;
}

double census_length(std::span<const CountSignal> census) {
  if (census.empty()) throw OuterError("empty census set");
  double tc = std::numeric_limits<double>::infinity();
  for (const auto& s : census) tc = std::min(tc, static_cast<double>(s.grid.num_points) * s.grid.step);
  return tc;
}

std::size_t count_true(const OuterFormula& gamma, std::span<const CountSignal> census) {
  std::size_t m = 0;
  for (const auto& s : census) {
    stl::TimeDomain dom;
    const auto bits = evaluable(gamma, s, dom);
    if (dom.empty()) throw OuterError("formula has an empty time domain on a census session");
    for (auto b : bits) m += b;
  }
  return m;
}

Accuracy accuracy(const OuterFormula& cause, const OuterFormula& effect, std::span<const CountSignal> census) {
  Accuracy acc;
  for (const auto& s : census) {
    stl::TimeDomain dc;
    stl::TimeDomain de;
    const auto c = evaluable(cause, s, dc);
    const auto e = evaluable(effect, s, de);
    const auto common = stl::intersect(dc, de);
    if (common.empty()) continue;
    for (auto t = common.first; t <= common.last; ++t) {
      const bool ct = c[static_cast<std::size_t>(t - dc.first)] != 0;
      acc.m_c += ct ? 1 : 0;
      acc.m_ce += ct && e[static_cast<std::size_t>(t - de.first)] != 0 ? 1 : 0;
    }
  }
  acc.p = acc.m_c == 0 ? -1.0 : static_cast<double>(acc.m_ce) / static_cast<double>(acc.m_c);
  return acc;
}

Accuracy validate(const OuterFormula& cause, const OuterFormula& effect, std::span<const CountSignal> census) {
  return accuracy(cause, effect, census);
}

double objective(const Accuracy& acc, const RelationshipAtoms& atoms, double lambda1, double lambda2) {
  const double base = -100.0 * acc.p - lambda1 * static_cast<double>(acc.m_c);
  if (atoms.relationship == Relationship::Similarity) {
    return base - lambda2 * static_cast<double>(atoms.cause_threshold + atoms.effect_threshold);
  }
  double width = 0.0;
  double penalty = 0.0;
  for (const auto* side : {&atoms.cause_bounds, &atoms.effect_bounds}) {
    for (const auto& b : *side) {
      width += b.upper - b.lower;
      if (b.upper - b.lower <= 1) penalty += kGapPenalty;
    }
  }
  return base + lambda2 * width + penalty;
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.acc.p != b.acc.p) return a.acc.p > b.acc.p;
  if (a.acc.m_c != b.acc.m_c) return a.acc.m_c > b.acc.m_c;
  if (a.span != b.span) return a.span < b.span;
  return a.objective < b.objective;
}

Candidate search_outer(std::span<const CountSignal> census, std::span<const Subgroup> subgroups,
                       Relationship relationship, OuterTemplateKind kind, std::pair<std::size_t, std::size_t> pair,
                       const OuterConfig& cfg) {
  const Problem p = make_problem(census, subgroups, relationship, kind, pair, cfg);
  pso::PSOConfig pc = cfg.pso;
  std::string stream(template_name(kind));
  if (relationship == Relationship::Similarity) {
    stream += "/" + std::to_string(pair.first) + "/" + std::to_string(pair.second);
  }
  pc.seed = derive_seed(cfg.pso.seed, stream);
  const auto result = pso::optimize([&](std::span<const double> beta) { return p.cost(beta); }, p.space(), pc);
  return finalize(p, result.best_params);
}

Candidate enumerate_outer(std::span<const CountSignal> census, std::span<const Subgroup> subgroups,
                          Relationship relationship, OuterTemplateKind kind, std::pair<std::size_t, std::size_t> pair,
                          const OuterConfig& cfg) {
  const Problem p = make_problem(census, subgroups, relationship, kind, pair, cfg);
  const pso::SearchSpace sp = p.space();

  // Value lists per dimension; complementarity bounds enumerate (lower, upper) jointly.
  std::vector<std::vector<std::vector<double>>> axes;
  for (std::size_t i = 0; i < p.num_taus; ++i) {
    std::vector<std::vector<double>> vals;
    const auto& d = sp[i];
    const auto n = static_cast<std::size_t>(std::floor((d.upper - d.lower) / d.step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) vals.push_back({d.lower + static_cast<double>(k) * d.step});
    axes.push_back(std::move(vals));
  }
  if (relationship == Relationship::Similarity) {
    for (std::size_t i = p.num_taus; i < sp.size(); ++i) {
      std::vector<std::vector<double>> vals;
      for (int c = 0; c <= static_cast<int>(sp[i].upper); ++c) vals.push_back({static_cast<double>(c)});
      axes.push_back(std::move(vals));
    }
  } else {
    for (std::size_t i = p.num_taus; i < sp.size(); i += 2) {
      const int top = static_cast<int>(sp[i].upper);
      std::vector<std::vector<double>> wide;
      std::vector<std::vector<double>> all;
      for (int lo = 0; lo <= top; ++lo) {
        for (int hi = 0; hi <= top; ++hi) {
          all.push_back({static_cast<double>(lo), static_cast<double>(hi)});
          if (hi - lo > 1) wide.push_back(all.back());
        }
      }
      axes.push_back(wide.empty() ? std::move(all) : std::move(wide));
    }
  }

  std::vector<std::size_t> idx(axes.size(), 0);
  std::vector<double> beta;
  std::vector<double> best_beta;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    beta.clear();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& v = axes[a][idx[a]];
      beta.insert(beta.end(), v.begin(), v.end());
    }
    const double c = p.cost(beta);
    if (c < best) {
      best = c;
      best_beta = beta;
    }
    std::size_t a = axes.size();
    while (a > 0) {
      if (++idx[a - 1] < axes[a - 1].size()) break;
      idx[a - 1] = 0;
      --a;
    }
    if (a == 0) break;
  }
  return finalize(p, best_beta);
}

std::vector<Candidate> infer_outer(std::span<const CountSignal> census, std::span<const Subgroup> subgroups,
                                   Relationship relationship, std::span<const OuterTemplateKind> templates,
                                   const OuterConfig& cfg) {
  if (subgroups.empty()) throw OuterError("outer inference needs at least one subgroup");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (relationship == Relationship::Complementarity) {
    pairs.emplace_back(0, 0);
  } else if (cfg.pair) {
    pairs.push_back(*cfg.pair);
  } else {
    for (std::size_t i = 0; i < subgroups.size(); ++i) {
      for (std::size_t j = 0; j < subgroups.size(); ++j) pairs.emplace_back(i, j);
    }
  }

  struct Job {
    OuterTemplateKind kind;
    std::pair<std::size_t, std::size_t> pair;
  };
  std::vector<Job> jobs;
  for (auto kind : templates) {
    for (const auto& pr : pairs) jobs.push_back({kind, pr});
  }
  std::vector<std::optional<Candidate>> found(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    try {
      found[i] = search_outer(census, subgroups, relationship, jobs[i].kind, jobs[i].pair, cfg);
    } catch (const OuterError& e) {
      errors[i] = e.what();
    }
  });

  std::vector<Candidate> ranked;
  for (auto& f : found) {
    if (f) ranked.push_back(std::move(*f));
  }
  if (ranked.empty()) {
    std::string msg = "no feasible outer formula";
    for (const auto& e : errors) {
      if (!e.empty()) {
        msg += ": " + e;
        break;
      }
    }
    throw OuterError(msg);
  }
  std::stable_sort(ranked.begin(), ranked.end(), ranks_before);
  return ranked;
}

void write_outer_report(std::span<const Candidate> candidates, std::span<const std::optional<Accuracy>> validation,
                        std::ostream& out) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  out << "formula,template,m_ce,m_c,p,mv_ce,mv_c,pv\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    out << quote(stl::format_formula(c.instance.gamma)) << ',' << template_name(c.tmpl.kind) << ',' << c.acc.m_ce
        << ',' << c.acc.m_c << ',' << format_double(c.acc.p) << ',';
    if (i < validation.size() && validation[i]) {
      const auto& v = *validation[i];
      out << v.m_ce << ',' << v.m_c << ',' << format_double(v.p);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

}  // namespace censtl::outer
