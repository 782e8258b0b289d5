#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dendrograph/errors.hpp"

namespace dendrograph {

// Undirected edge, stored once with u < v.
struct Edge {
  int u;
  int v;
  double weight;
};

struct ParseOptions {
  // Silently skip self-loop lines instead of raising SelfLoopError.
  bool drop_self_loops = false;
};

// Weighted undirected connected graph without self-loops.
//
// Node weights w(u) = sum of incident edge weights and the total weight
// w = sum_u w(u) = 2 * (sum of stored edge weights) are cached at
// construction. The graph is the source of the node-pair sampling
// distribution p(u,v) = w(u,v)/w; immutable once built.
class WeightedGraph {
public:
  // Parses "u v [weight]" lines; '#' starts a comment, weight defaults to 1,
  // labels get dense ids in first-appearance order, duplicate pairs are
  // summed. Throws ParseError / SelfLoopError / ValidationError /
  // DisconnectedGraphError; error messages carry 1-based line numbers.
  static WeightedGraph parse_edge_list(std::istream& in, ParseOptions options = {});
  static WeightedGraph parse_edge_list(const std::string& text, ParseOptions options = {});

  // Builds from pre-resolved edges (u, v as ids into labels). Validates the
  // same invariants as the parser: positive weights, no self-loops,
  // connectivity.
  static WeightedGraph from_edges(std::vector<std::string> labels, const std::vector<Edge>& edges);

  int node_count() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int u) const { return labels_[static_cast<std::size_t>(u)]; }
  // -1 when the label is unknown.
  int find_label(const std::string& label) const;

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const std::pair<int, double>> neighbors(int u) const;

  // w(u,v); 0 when the pair is not an edge.
  double edge_weight(int u, int v) const;
  double node_weight(int u) const { return node_weight_[static_cast<std::size_t>(u)]; }
  double total_weight() const { return total_weight_; }

  // p(u,v) = w(u,v)/w. Symmetric; sums to 1 over ordered pairs u != v.
  double pair_probability(int u, int v) const;
  // p(u) = w(u)/w.
  double node_probability(int u) const;
  // Random-walk transition p(v|u) = w(u,v)/w(u).
  double transition_probability(int u, int v) const;

  // Symmetric cluster cross mass 2*w(A,B)/w for disjoint non-empty A, B;
  // both pair orders counted, matching the per-internal-node masses used
  // throughout the metrics. Throws ValidationError on overlap or empty sets.
  double cluster_cross_mass(std::span<const int> a, std::span<const int> b) const;

private:
  WeightedGraph() = default;
  void finalize();  // builds adjacency and node weights, checks connectivity
  void check_node(int u) const;

  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::pair<int, double>> adjacency_;  // grouped by node, sorted by neighbor
  std::vector<std::size_t> adjacency_offset_;      // size n+1
  std::vector<double> node_weight_;
  double total_weight_ = 0.0;
};

enum class PriorKind { uniform, degree, custom };

// Probability distribution pi on the nodes with full support; the prior
// knowledge about relative node weights used by the decoder.
class NodePrior {
public:
  static NodePrior uniform(int n);
  static NodePrior degree(const WeightedGraph& g);
  // Normalizes the given positive weights. Throws ValidationError on a zero
  // or negative entry.
  static NodePrior custom(std::vector<double> weights);

  PriorKind kind() const { return kind_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int u) const { return values_[static_cast<std::size_t>(u)]; }
  const std::vector<double>& values() const { return values_; }

private:
  NodePrior(PriorKind kind, std::vector<double> values);

  PriorKind kind_;
  std::vector<double> values_;
};

NodePrior build_prior(const WeightedGraph& g, PriorKind kind,
                      const std::vector<double>* custom = nullptr);

// pi(A) = sum of member priors. Throws ValidationError on an empty set.
double prior_mass(const NodePrior& prior, std::span<const int> members);

}  // namespace dendrograph
