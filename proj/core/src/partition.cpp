#include "censtl/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "censtl/format.hpp"
#include "censtl/parallel.hpp"

namespace censtl::partition {

namespace {

bool is_subset(const AgentSet& e, const std::vector<char>& member) {
  return std::all_of(e.begin(), e.end(), [&](std::size_t v) { return member[v] != 0; });
}

bool touches(const AgentSet& e, const std::vector<char>& member) {
  return std::any_of(e.begin(), e.end(), [&](std::size_t v) { return member[v] != 0; });
}

std::size_t label_count(const Hypergraph& h) {
  std::size_t n = h.labels.size();
  if (!h.vertices.empty()) n = std::max(n, h.vertices.back() + 1);
  for (const auto& e : h.edges) {
    if (!e.vertices.empty()) n = std::max(n, e.vertices.back() + 1);
  }
  return n;
}

AgentSet excluded_of(const Hypergraph& h) {
  AgentSet out;
  for (std::size_t a = 0; a < h.labels.size(); ++a) {
    if (!std::binary_search(h.vertices.begin(), h.vertices.end(), a)) out.push_back(a);
  }
  return out;
}

void canonicalize(std::vector<AgentSet>& parts) {
  for (auto& p : parts) std::sort(p.begin(), p.end());
  std::sort(parts.begin(), parts.end());
}

PartitionResult finish(const Hypergraph& h, std::vector<AgentSet> parts) {
  canonicalize(parts);
  PartitionResult r;
  r.fitness.reserve(parts.size());
  for (const auto& p : parts) r.fitness.push_back(fitness(p, h));
  r.subgroups = std::move(parts);
  r.excluded = excluded_of(h);
  r.cut = cut_weight(r.subgroups, h);
  return r;
}

// Local edge list over vertex positions 0..n-1.
struct LocalGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> edges;
  std::vector<double> weights;
  std::vector<std::vector<std::size_t>> incident;
};

LocalGraph restrict(const Hypergraph& h, const AgentSet& vertices) {
  LocalGraph g;
  g.n = vertices.size();
  g.incident.resize(g.n);
  for (const auto& e : h.edges) {
    std::vector<std::size_t> local;
    for (std::size_t v : e.vertices) {
      auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
      if (it != vertices.end() && *it == v) local.push_back(static_cast<std::size_t>(it - vertices.begin()));
    }
    if (local.size() < 2) continue;
    const std::size_t id = g.edges.size();
    for (std::size_t v : local) g.incident[v].push_back(id);
    g.edges.push_back(std::move(local));
    g.weights.push_back(e.weight);
  }
  return g;
}

// Two-sided state with per-edge counts on side A.
struct Bisection {
  const LocalGraph* g;
  std::vector<char> in_a;
  std::vector<std::size_t> count_a;
  std::size_t size_a = 0;
  double cut = 0.0;

  explicit Bisection(const LocalGraph& graph)
      : g(&graph), in_a(graph.n, 0), count_a(graph.edges.size(), 0) {}

  bool is_cut(std::size_t e, std::size_t ca) const { return ca > 0 && ca < g->edges[e].size(); }

  // Cut reduction from moving v to the other side.
  double gain(std::size_t v) const {
    double d = 0.0;
    for (std::size_t e : g->incident[v]) {
      const std::size_t ca = count_a[e];
      const std::size_t next = in_a[v] ? ca - 1 : ca + 1;
      d += (is_cut(e, ca) ? g->weights[e] : 0.0) - (is_cut(e, next) ? g->weights[e] : 0.0);
    }
    return d;
  }

  void move(std::size_t v) {
    cut -= gain(v);
    for (std::size_t e : g->incident[v]) {
      if (in_a[v]) {
        --count_a[e];
      } else {
        ++count_a[e];
      }
    }
    if (in_a[v]) {
      --size_a;
    } else {
      ++size_a;
    }
    in_a[v] = in_a[v] ? 0 : 1;
  }
};

void fm_refine(Bisection& b, std::size_t smin, std::size_t smax) {
  const std::size_t n = b.g->n;
  for (;;) {
    std::vector<char> locked(n, 0);
    std::vector<std::size_t> moves;
    double best = b.cut;
    std::size_t best_prefix = 0;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      double pick_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < n; ++v) {
        if (locked[v]) continue;
        const std::size_t next = b.in_a[v] ? b.size_a - 1 : b.size_a + 1;
        if (next < smin || next > smax) continue;
        const double gv = b.gain(v);
        if (gv > pick_gain) {
          pick_gain = gv;
          pick = v;
        }
      }
      if (pick == n) break;
      b.move(pick);
      locked[pick] = 1;
      moves.push_back(pick);
      if (b.cut < best - 1e-12 * std::max(1.0, std::abs(best))) {
        best = b.cut;
        best_prefix = moves.size();
      }
    }
    for (std::size_t i = moves.size(); i > best_prefix; --i) b.move(moves[i - 1]);
    b.cut = best;
    if (best_prefix == 0) return;
  }
}

// Returns the vertex positions placed on side A.
std::vector<char> bisect(const LocalGraph& g, std::size_t smin, std::size_t smax) {
  std::vector<char> best_side;
  double best_cut = std::numeric_limits<double>::infinity();
  for (std::size_t seed = 0; seed < g.n; ++seed) {
    Bisection b(g);
    b.move(seed);
    while (b.size_a < smin) {
      std::size_t pick = g.n;
      double pick_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < g.n; ++v) {
        if (b.in_a[v]) continue;
        const double gv = b.gain(v);
        if (gv > pick_gain) {
          pick_gain = gv;
          pick = v;
        }
      }
      b.move(pick);
    }
    fm_refine(b, smin, smax);
    if (best_side.empty() || b.cut < best_cut - 1e-12 * std::max(1.0, std::abs(best_cut))) {
      best_cut = b.cut;
      best_side = b.in_a;
    }
  }
  return best_side;
}

void recursive_partition(const Hypergraph& h, const AgentSet& vertices, std::size_t k, double balance,
                         std::vector<AgentSet>& out) {
  if (k == 1) {
    out.push_back(vertices);
    return;
  }
  const std::size_t n = vertices.size();
  const std::size_t k1 = k / 2;
  const std::size_t k2 = k - k1;
  const double half = static_cast<double>(n) / 2.0;
  const double lo = std::floor(half * (1.0 - balance) + 1e-9);
  const double hi = std::ceil(half * (1.0 + balance) - 1e-9);
  const std::size_t smin = std::max<std::size_t>(k1, lo < 0.0 ? 0 : static_cast<std::size_t>(lo));
  const std::size_t smax = std::min<std::size_t>(n - k2, static_cast<std::size_t>(std::max(hi, 0.0)));
  if (smin > smax) {
    throw PartitionError("balance " + format_double(balance) + " admits no split of " + std::to_string(n) +
                         " vertices into " + std::to_string(k) + " parts");
  }
  const LocalGraph g = restrict(h, vertices);
  const std::vector<char> side = bisect(g, smin, smax);
  AgentSet a;
  AgentSet b;
  for (std::size_t i = 0; i < n; ++i) (side[i] ? a : b).push_back(vertices[i]);
  recursive_partition(h, a, k1, balance, out);
  recursive_partition(h, b, k2, balance, out);
}

std::vector<AgentSet> combinations(const AgentSet& items, std::size_t size) {
  std::vector<AgentSet> out;
  if (size > items.size()) return out;
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    AgentSet c;
    c.reserve(size);
    for (std::size_t i : idx) c.push_back(items[i]);
    out.push_back(std::move(c));
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == items.size() - size + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace

AgentSet frequent_agents(const census::SignatureMatrix& sig, double minsup) {
  if (!(minsup > 0.0 && minsup < 1.0)) throw PartitionError("minsup must lie in (0, 1)");
  AgentSet out;
  for (std::size_t a = 0; a < sig.num_agents(); ++a) {
    if (census::support(sig, {a}) > minsup) out.push_back(a);
  }
  return out;
}

std::vector<std::pair<AgentSet, double>> apriori_itemsets(const census::SignatureMatrix& sig,
                                                          const AgentSet& frequent, double minsup) {
  std::vector<std::pair<AgentSet, double>> out;
  std::vector<AgentSet> level;
  for (std::size_t a : frequent) level.push_back({a});
  std::sort(level.begin(), level.end());
  while (level.size() >= 2) {
    const std::set<AgentSet> known(level.begin(), level.end());
    std::vector<AgentSet> candidates;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        const auto& x = level[i];
        const auto& y = level[j];
        if (!std::equal(x.begin(), x.end() - 1, y.begin())) break;
        AgentSet c = x;
        c.push_back(y.back());
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 < c.size() && closed; ++drop) {
          AgentSet sub;
          for (std::size_t t = 0; t < c.size(); ++t) {
            if (t != drop) sub.push_back(c[t]);
          }
          closed = known.count(sub) > 0;
        }
        if (closed) candidates.push_back(std::move(c));
      }
    }
    std::vector<double> sup(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) { sup[i] = census::support(sig, candidates[i]); });
    level.clear();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (sup[i] > minsup) {
        out.emplace_back(candidates[i], sup[i]);
        level.push_back(std::move(candidates[i]));
      }
    }
  }
  return out;
}

Hypergraph build_hypergraph(const census::SignatureMatrix& sig, const PartitionConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw PartitionError("epsilon must be positive");
  Hypergraph h;
  h.labels = sig.agents();
  if (cfg.relationship == Relationship::Similarity) {
    h.vertices = frequent_agents(sig, cfg.minsup);
    for (auto& [set, sup] : apriori_itemsets(sig, h.vertices, cfg.minsup)) {
      h.edges.push_back({std::move(set), sup});
    }
    return h;
  }
  if (cfg.max_edge_size < 2) throw PartitionError("max_edge_size must be at least 2");
  h.vertices.resize(sig.num_agents());
  std::iota(h.vertices.begin(), h.vertices.end(), 0);
  std::vector<AgentSet> sets;
  const std::size_t top = std::min(cfg.max_edge_size, h.vertices.size());
  for (std::size_t size = 2; size <= top; ++size) {
    auto level = combinations(h.vertices, size);
    sets.insert(sets.end(), std::make_move_iterator(level.begin()), std::make_move_iterator(level.end()));
  }
  std::vector<double> w(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) { w[i] = 1.0 / (census::count_variance(sig, sets[i]) + cfg.epsilon); });
  h.edges.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) h.edges.push_back({std::move(sets[i]), w[i]});
  return h;
}

double fitness(const AgentSet& group, const Hypergraph& h) {
  std::vector<char> member(label_count(h), 0);
  for (std::size_t v : group) {
    if (v >= member.size()) member.resize(v + 1, 0);
    member[v] = 1;
  }
  double inside = 0.0;
  double touching = 0.0;
  for (const auto& e : h.edges) {
    if (!touches(e.vertices, member)) continue;
    touching += e.weight;
    if (is_subset(e.vertices, member)) inside += e.weight;
  }
  return touching > 0.0 ? inside / touching : 0.0;
}

double cut_weight(const std::vector<AgentSet>& parts, const Hypergraph& h) {
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> part_of(label_count(h), none);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (std::size_t v : parts[p]) {
      if (v >= part_of.size()) part_of.resize(v + 1, none);
      part_of[v] = p;
    }
  }
  double cut = 0.0;
  for (const auto& e : h.edges) {
    std::size_t first = none;
    for (std::size_t v : e.vertices) {
      const std::size_t p = part_of[v];
      if (p == none) continue;
      if (first == none) {
        first = p;
      } else if (p != first) {
        cut += e.weight;
        break;
      }
    }
  }
  return cut;
}

PartitionResult min_cut_partition(const Hypergraph& h, std::size_t k, double balance) {
  if (k < 2) throw PartitionError("min-cut partition needs k >= 2");
  if (k > h.vertices.size()) {
    throw PartitionError("cannot split " + std::to_string(h.vertices.size()) + " vertices into " +
                         std::to_string(k) + " parts");
  }
  if (!(balance >= 0.0) || !std::isfinite(balance)) throw PartitionError("balance must be a finite value >= 0");
  std::vector<AgentSet> parts;
  recursive_partition(h, h.vertices, k, balance, parts);
  return finish(h, std::move(parts));
}

PartitionResult select_num_subgroups(const Hypergraph& h, const PartitionConfig& cfg) {
  std::vector<PartitionResult> runs(h.vertices.size() >= 2 ? h.vertices.size() - 1 : 0);
  parallel_for(runs.size(), [&](std::size_t i) { runs[i] = min_cut_partition(h, i + 2, cfg.balance); });
  for (std::size_t i = runs.size(); i > 0; --i) {
    const auto& f = runs[i - 1].fitness;
    if (std::all_of(f.begin(), f.end(), [&](double x) { return x > cfg.fitness_threshold; })) {
      return runs[i - 1];
    }
  }
  std::vector<AgentSet> whole;
  if (!h.vertices.empty()) whole.push_back(h.vertices);
  return finish(h, std::move(whole));
}

PartitionResult brute_force_best_partition(const Hypergraph& h, std::size_t k, bool balanced) {
  const std::size_t n = h.vertices.size();
  if (n > 12) throw PartitionError("brute-force partition supports at most 12 vertices");
  if (k == 0 || k > n) throw PartitionError("k must lie in [1, number of vertices]");

  std::vector<std::uint32_t> masks;
  std::vector<double> weights;
  for (const auto& e : h.edges) {
    std::uint32_t m = 0;
    for (std::size_t v : e.vertices) {
      auto it = std::lower_bound(h.vertices.begin(), h.vertices.end(), v);
      if (it != h.vertices.end() && *it == v) m |= 1u << (it - h.vertices.begin());
    }
    masks.push_back(m);
    weights.push_back(e.weight);
  }
  // Edges reaching outside the vertex set can never be inside a part.
  std::vector<char> partial(h.edges.size());
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    partial[i] = static_cast<std::size_t>(std::popcount(masks[i])) != h.edges[i].vertices.size();
  }
  auto part_fitness = [&](std::uint32_t s) {
    double inside = 0.0;
    double touching = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if ((masks[i] & s) == 0) continue;
      touching += weights[i];
      if (!partial[i] && (masks[i] & ~s) == 0) inside += weights[i];
    }
    return touching > 0.0 ? inside / touching : 0.0;
  };

  const std::size_t small = n / k;
  const std::size_t large = (n + k - 1) / k;
  std::vector<std::size_t> label(n, 0);
  std::vector<std::uint32_t> best_masks;
  std::vector<AgentSet> best_parts;
  double best_min = -1.0;

  auto consider = [&] {
    std::vector<std::uint32_t> parts(k, 0);
    for (std::size_t i = 0; i < n; ++i) parts[label[i]] |= 1u << i;
    if (balanced) {
      for (auto m : parts) {
        const auto c = static_cast<std::size_t>(std::popcount(m));
        if (c < small || c > large) return;
      }
    }
    double worst = std::numeric_limits<double>::infinity();
    for (auto m : parts) worst = std::min(worst, part_fitness(m));
    std::vector<AgentSet> sets(k);
    for (std::size_t i = 0; i < n; ++i) sets[label[i]].push_back(h.vertices[i]);
    canonicalize(sets);
    const double tol = 1e-12;
    if (worst > best_min + tol || (worst >= best_min - tol && sets < best_parts)) {
      best_min = std::max(worst, best_min);
      best_parts = std::move(sets);
    }
  };

  // Restricted-growth strings with exactly k blocks.
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (n - i < k - used) return;
    if (i == n) {
      if (used == k) consider();
      return;
    }
    for (std::size_t b = 0; b <= used && b < k; ++b) {
      label[i] = b;
      self(self, i + 1, b == used ? used + 1 : used);
    }
  };
  recurse(recurse, 0, 0);
  if (best_parts.empty()) throw PartitionError("no partition satisfies the size constraint");
  return finish(h, std::move(best_parts));
}

void write_hypergraph(const Hypergraph& h, std::ostream& out) {
  for (const auto& e : h.edges) {
    for (std::size_t i = 0; i < e.vertices.size(); ++i) {
      if (i > 0) out << ',';
      const std::size_t v = e.vertices[i];
      out << (v < h.labels.size() ? h.labels[v] : std::to_string(v));
    }
    out << ':' << format_double(e.weight) << '\n';
  }
}

void write_partition_report(const PartitionResult& result, const std::vector<std::string>& labels,
                            std::ostream& out) {
  auto name = [&](std::size_t v) { return v < labels.size() ? labels[v] : std::to_string(v); };
  out << "subgroup,members,fitness\n";
  for (std::size_t s = 0; s < result.subgroups.size(); ++s) {
    out << 'S' << s + 1 << ',';
    for (std::size_t i = 0; i < result.subgroups[s].size(); ++i) {
      if (i > 0) out << ' ';
      out << name(result.subgroups[s][i]);
    }
    out << ',' << format_double(result.fitness[s]) << '\n';
  }
  if (!result.excluded.empty()) {
    out << "excluded,";
    for (std::size_t i = 0; i < result.excluded.size(); ++i) {
      if (i > 0) out << ' ';
      out << name(result.excluded[i]);
    }
    out << ",\n";
  }
}

}  // namespace censtl::partition
