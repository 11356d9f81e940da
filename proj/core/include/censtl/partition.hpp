#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "censtl/census.hpp"

namespace censtl::partition {

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using census::AgentSet;

/// Sorted agent indices (|e| >= 2) with a non-negative weight.
struct Hyperedge {
  AgentSet vertices;
  double weight = 0.0;
};

struct Hypergraph {
  /// Agent indices, ascending.
  AgentSet vertices;
  /// Display label for every agent index of the source matrix.
  std::vector<std::string> labels;
  std::vector<Hyperedge> edges;
};

enum class Relationship { Similarity, Complementarity };

struct PartitionConfig {
  Relationship relationship = Relationship::Similarity;
  double minsup = 0.2;
  double fitness_threshold = 0.2;
  std::size_t max_edge_size = 4;
  double epsilon = 1e-7;
  /// Fractional slack on the half size at every bisection; 0 keeps halves within one vertex.
  double balance = 0.0;
};

struct PartitionResult {
  /// Disjoint agent sets, each ascending, ordered by their first member.
  std::vector<AgentSet> subgroups;
  std::vector<double> fitness;
  /// Agents left out of the hypergraph (infrequent under similarity).
  AgentSet excluded;
  double cut = 0.0;
};

/// Agents whose support strictly exceeds minsup.
AgentSet frequent_agents(const census::SignatureMatrix& sig, double minsup);

/// Level-wise frequent itemsets of size >= 2 drawn from `frequent`, with support.
std::vector<std::pair<AgentSet, double>> apriori_itemsets(const census::SignatureMatrix& sig,
                                                          const AgentSet& frequent, double minsup);

/// Similarity: frequent itemsets weighted by support, over the frequent agents.
/// Complementarity: every subset of 2..max_edge_size agents weighted 1/(Var+eps).
Hypergraph build_hypergraph(const census::SignatureMatrix& sig, const PartitionConfig& cfg);

/// Weight of edges inside `group` over the weight of edges touching it; 0 if none touch.
double fitness(const AgentSet& group, const Hypergraph& h);

double cut_weight(const std::vector<AgentSet>& parts, const Hypergraph& h);

/// Recursive bisection with greedy seeding and Fiduccia-Mattheyses refinement.
PartitionResult min_cut_partition(const Hypergraph& h, std::size_t k, double balance = 0.0);

/// Largest k whose min-cut partition keeps every fitness above the threshold;
/// falls back to the whole vertex set.
PartitionResult select_num_subgroups(const Hypergraph& h, const PartitionConfig& cfg);

/// Exhaustive search maximising the minimum fitness (at most 12 vertices).
/// With `balanced`, part sizes differ by at most one.
PartitionResult brute_force_best_partition(const Hypergraph& h, std::size_t k, bool balanced = false);

/// One line per edge: "v1,v2,...:weight".
void write_hypergraph(const Hypergraph& h, std::ostream& out);
void write_partition_report(const PartitionResult& result, const std::vector<std::string>& labels,
                            std::ostream& out);

}  // namespace censtl::partition
