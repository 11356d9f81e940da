#include <cctype>
#include <cmath>

#include "censtl/format.hpp"
#include "censtl/stl.hpp"

namespace censtl::stl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  std::size_t pos() const { return pos_; }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }
  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(pos_, message); }

  /// Identifier at the cursor without consuming it.
  std::string_view peek_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return {};
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    return text_.substr(pos_, end - pos_);
  }
  std::string_view ident() {
    const auto id = peek_ident();
    if (id.empty()) fail("expected an identifier");
    pos_ += id.size();
    return id;
  }
  /// True when the identifier at the cursor is `word` followed by an interval bracket.
  bool temporal_keyword(std::string_view word) {
    if (peek_ident() != word) return false;
    std::size_t p = pos_ + word.size();
    while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    return p < text_.size() && (text_[p] == '[' || text_[p] == '(');
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    auto digits = [&] {
      const std::size_t before = p;
      while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
      return p > before;
    };
    if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
    bool any = digits();
    if (p < text_.size() && text_[p] == '.') {
      ++p;
      any = digits() || any;
    }
    if (!any) fail("expected a number");
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
        p = q;
        digits();
      }
    }
    double value = 0.0;
    if (!parse_double(text_.substr(start, p - start), value)) fail("malformed number");
    pos_ = p;
    return value;
  }

  std::size_t index() {
    skip_ws();
    std::size_t p = pos_;
    std::size_t value = 0;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
      value = value * 10 + static_cast<std::size_t>(text_[p] - '0');
      ++p;
    }
    if (p == pos_) fail("expected a variable index");
    pos_ = p;
    return value;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Interval parse_interval(Cursor& in) {
  Interval i;
  if (in.accept("[")) {
    i.lo_closed = true;
  } else if (in.accept("(")) {
    i.lo_closed = false;
  } else {
    in.fail("expected '[' or '(' to open an interval");
  }
  i.lo = in.number();
  in.expect(",");
  const std::size_t at = in.pos();
  i.hi = in.number();
  if (in.accept("]")) {
    i.hi_closed = true;
  } else if (in.accept(")")) {
    i.hi_closed = false;
  } else {
    in.fail("expected ']' or ')' to close an interval");
  }
  if (!(i.lo <= i.hi)) throw ParseError(at, "interval lower bound exceeds upper bound");
  return i;
}

template <class A, class AtomParser>
class FormulaParser {
 public:
  using F = Formula<A>;

  FormulaParser(Cursor& in, AtomParser atom) : in_(in), atom_(std::move(atom)) {}

  F parse() {
    F f = until();
    if (!in_.at_end()) in_.fail("unexpected input");
    return f;
  }

 private:
  F until() {
    F left = implies();
    while (in_.temporal_keyword("U")) {
      in_.ident();
      const Interval i = parse_interval(in_);
      F right = implies();
      left = F::until(i, std::move(left), std::move(right));
    }
    return left;
  }

  F implies() {
    F left = disjunction();
    if (in_.accept("=>")) return F::implies(std::move(left), implies());
    return left;
  }

  F disjunction() {
    std::vector<F> parts{conjunction()};
    while (in_.accept("|")) parts.push_back(conjunction());
    return F::disj(std::move(parts));
  }

  F conjunction() {
    std::vector<F> parts{unary()};
    while (in_.accept("&")) parts.push_back(unary());
    return F::conj(std::move(parts));
  }

  F unary() {
    if (in_.accept("!")) return F::negate(unary());
    if (in_.temporal_keyword("G")) {
      in_.ident();
      const Interval i = parse_interval(in_);
      return F::always(i, unary());
    }
    if (in_.temporal_keyword("F")) {
      in_.ident();
      const Interval i = parse_interval(in_);
      return F::eventually(i, unary());
    }
    if (in_.accept("(")) {
      F f = until();
      in_.expect(")");
      return f;
    }
    if (in_.peek_ident() == "true") {
      in_.ident();
      return F::top();
    }
    if (in_.peek() == '\0') in_.fail("unexpected end of formula");
    return F::atom(atom_(in_));
  }

  Cursor& in_;
  AtomParser atom_;
};

geometry::HalfPlanePredicate parse_inline(Cursor& in, std::size_t dimension) {
  const std::size_t start = in.pos();
  in.expect("{");
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    bool less = false;
    double rhs = 0.0;
  };
  std::vector<Row> rows;
  std::size_t max_index = 0;
  do {
    Row row;
    bool first = true;
    for (;;) {
      double sign = 1.0;
      if (!first) {
        if (in.accept("+")) {
          sign = 1.0;
        } else if (in.accept("-")) {
          sign = -1.0;
        } else {
          break;
        }
      }
      first = false;
      double coef = 1.0;
      if (in.peek() == 'x') {
        coef = 1.0;
      } else if (in.peek() == '-' && [&] {
                   Cursor probe = in;
                   probe.accept("-");
                   return probe.peek() == 'x';
                 }()) {
        in.accept("-");
        coef = -1.0;
      } else {
        coef = in.number();
        in.accept("*");
      }
      in.expect("x");
      const std::size_t idx = in.index();
      if (idx == 0) in.fail("variable indices start at x1");
      max_index = std::max(max_index, idx);
      row.terms.emplace_back(idx, sign * coef);
    }
    if (in.accept(">")) {
      row.less = false;
    } else if (in.accept("<")) {
      row.less = true;
    } else {
      in.fail("expected '>' or '<' in a predicate row");
    }
    row.rhs = in.number();
    rows.push_back(std::move(row));
  } while (in.accept(";"));
  in.expect("}");

  const std::size_t w = dimension == 0 ? max_index : dimension;
  if (max_index > w) throw ParseError(start, "predicate refers to x" + std::to_string(max_index) +
                                                 " but the dimension is " + std::to_string(w));
  std::vector<geometry::HalfSpace> halfspaces;
  for (const auto& row : rows) {
    geometry::HalfSpace h{std::vector<double>(w, 0.0), row.rhs};
    for (const auto& [idx, coef] : row.terms) h.normal[idx - 1] += coef;
    if (row.less) {
      for (auto& a : h.normal) a = -a;
      h.offset = -h.offset;
    }
    halfspaces.push_back(std::move(h));
  }
  try {
    return geometry::HalfPlanePredicate::normalized(std::move(halfspaces));
  } catch (const geometry::GeometryError& e) {
    throw ParseError(start, e.what());
  }
}

// Printing --------------------------------------------------------------------------

int precedence(Op op) {
  switch (op) {
    case Op::Until:
      return 0;
    case Op::Implies:
      return 1;
    case Op::Or:
      return 2;
    case Op::And:
      return 3;
    case Op::Not:
    case Op::Always:
    case Op::Eventually:
      return 4;
    case Op::True:
    case Op::Atom:
      return 5;
  }
  return 5;
}

std::string atom_text(const PredicateAtom& a) {
  if (!a.name.empty()) return "pred:" + a.name;
  return format_predicate(a.predicate);
}

std::string atom_text(const CensusAtom& a) {
  return "N(" + a.subgroup + ") " + (a.direction == Direction::Greater ? ">" : "<") + " " +
         std::to_string(a.threshold);
}

template <class A>
std::string print(const Formula<A>& f);

template <class A>
std::string wrap(const Formula<A>& f, int min_precedence) {
  const std::string s = print(f);
  return precedence(f.op()) >= min_precedence ? s : "(" + s + ")";
}

template <class A>
std::string print(const Formula<A>& f) {
  switch (f.op()) {
    case Op::True:
      return "true";
    case Op::Atom:
      return atom_text(f.atom());
    case Op::Not:
      return "!" + wrap(f.child(), 4);
    case Op::Always:
      return "G" + format_interval(f.interval()) + " " + wrap(f.child(), 4);
    case Op::Eventually:
      return "F" + format_interval(f.interval()) + " " + wrap(f.child(), 4);
    case Op::And:
    case Op::Or: {
      const bool is_and = f.op() == Op::And;
      std::string s;
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i > 0) s += is_and ? " & " : " | ";
        s += wrap(f.child(i), is_and ? 4 : 3);
      }
      return s;
    }
    case Op::Implies:
      return wrap(f.child(0), 2) + " => " + wrap(f.child(1), 1);
    case Op::Until:
      return wrap(f.child(0), 0) + " U" + format_interval(f.interval()) + " " + wrap(f.child(1), 1);
  }
  return {};
}

}  // namespace

InnerFormula parse_inner(std::string_view text, const PredicateTable& table, const ParseOptions& options) {
  Cursor in(text);
  auto atom = [&table, &options](Cursor& c) -> PredicateAtom {
    if (c.peek() == '{') return PredicateAtom{"", parse_inline(c, options.dimension)};
    const std::size_t at = c.pos();
    std::string name(c.ident());
    if (name == "pred" && c.accept(":")) name = std::string(c.ident());
    const auto it = table.find(name);
    if (it == table.end()) throw ParseError(at, "unknown predicate '" + name + "'");
    return PredicateAtom{name, it->second};
  };
  return FormulaParser<PredicateAtom, decltype(atom)>(in, atom).parse();
}

OuterFormula parse_outer(std::string_view text) {
  Cursor in(text);
  auto atom = [](Cursor& c) -> CensusAtom {
    if (c.peek_ident() != "N") c.fail("expected a census atom N(S) > c");
    c.ident();
    c.expect("(");
    CensusAtom a;
    a.subgroup = std::string(c.ident());
    c.expect(")");
    if (c.accept(">")) {
      a.direction = Direction::Greater;
    } else if (c.accept("<")) {
      a.direction = Direction::Less;
    } else {
      c.fail("expected '>' or '<' after N(...)");
    }
    const std::size_t at = c.pos();
    const double value = c.number();
    if (value < 0.0) throw ParseError(at, "census threshold must be non-negative");
    if (value != std::floor(value) || value > 1e9) throw ParseError(at, "census threshold must be an integer");
    a.threshold = static_cast<int>(value);
    return a;
  };
  return FormulaParser<CensusAtom, decltype(atom)>(in, atom).parse();
}

std::string format_formula(const InnerFormula& phi) { return print(phi); }
std::string format_formula(const OuterFormula& phi) { return print(phi); }

std::string format_interval(const Interval& interval) {
  return std::string(interval.lo_closed ? "[" : "(") + format_double(interval.lo) + "," +
         format_double(interval.hi) + (interval.hi_closed ? "]" : ")");
}

std::string format_predicate(const geometry::HalfPlanePredicate& predicate) {
  std::string s = "{";
  for (std::size_t r = 0; r < predicate.rows().size(); ++r) {
    const auto& row = predicate.rows()[r];
    if (r > 0) s += " ; ";
    for (std::size_t j = 0; j < row.normal.size(); ++j) {
      if (j > 0) s += " + ";
      s += format_double(row.normal[j]) + "*x" + std::to_string(j + 1);
    }
    s += " > " + format_double(row.offset);
  }
  return s + "}";
}

}  // namespace censtl::stl
