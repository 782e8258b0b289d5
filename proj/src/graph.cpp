#include "dendrograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace dendrograph {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) fields.push_back(tok);
  return fields;
}

double parse_weight(const std::string& tok, std::size_t line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end != begin + tok.size() || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": bad weight '" + tok + "'");
  }
  return value;
}

}  // namespace

WeightedGraph WeightedGraph::parse_edge_list(const std::string& text, ParseOptions options) {
  std::istringstream in(text);
  return parse_edge_list(in, options);
}

WeightedGraph WeightedGraph::parse_edge_list(std::istream& in, ParseOptions options) {
  WeightedGraph g;
  std::unordered_map<std::string, int> id_of;
  // accumulate duplicate (u,v) lines; map keyed on (min,max)
  std::map<std::pair<int, int>, double> weight_of;

  auto intern = [&](const std::string& label) {
    auto [it, inserted] = id_of.emplace(label, static_cast<int>(g.labels_.size()));
    if (inserted) g.labels_.push_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'u v [weight]', got " +
                       std::to_string(fields.size()) + " fields");
    }
    double weight = fields.size() == 3 ? parse_weight(fields[2], line_no) : 1.0;
    if (fields[0] == fields[1]) {
      if (options.drop_self_loops) continue;
      throw SelfLoopError("line " + std::to_string(line_no) + ": self-loop on '" + fields[0] + "'");
    }
    if (weight <= 0.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": non-positive weight " +
                            fields[2]);
    }
    int u = intern(fields[0]);
    int v = intern(fields[1]);
    weight_of[{std::min(u, v), std::max(u, v)}] += weight;
  }

  if (g.labels_.empty()) throw ValidationError("empty edge list");
  g.edges_.reserve(weight_of.size());
  for (const auto& [pair, weight] : weight_of) {
    g.edges_.push_back({pair.first, pair.second, weight});
  }
  g.finalize();
  return g;
}

WeightedGraph WeightedGraph::from_edges(std::vector<std::string> labels,
                                        const std::vector<Edge>& edges) {
  WeightedGraph g;
  g.labels_ = std::move(labels);
  const int n = g.node_count();
  std::map<std::pair<int, int>, double> weight_of;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      throw ValidationError("edge endpoint out of range");
    }
    if (e.u == e.v) throw SelfLoopError("self-loop on '" + g.labels_[static_cast<std::size_t>(e.u)] + "'");
    if (e.weight <= 0.0) throw ValidationError("non-positive edge weight");
    weight_of[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.weight;
  }
  if (g.labels_.empty()) throw ValidationError("empty graph");
  g.edges_.reserve(weight_of.size());
  for (const auto& [pair, weight] : weight_of) {
    g.edges_.push_back({pair.first, pair.second, weight});
  }
  g.finalize();
  return g;
}

void WeightedGraph::finalize() {
  const int n = node_count();
  std::vector<std::size_t> degree(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges_) {
    ++degree[static_cast<std::size_t>(e.u)];
    ++degree[static_cast<std::size_t>(e.v)];
  }
  adjacency_offset_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int u = 0; u < n; ++u) {
    adjacency_offset_[static_cast<std::size_t>(u) + 1] =
        adjacency_offset_[static_cast<std::size_t>(u)] + degree[static_cast<std::size_t>(u)];
  }
  adjacency_.resize(adjacency_offset_.back());
  std::vector<std::size_t> cursor(adjacency_offset_.begin(), adjacency_offset_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[cursor[static_cast<std::size_t>(e.u)]++] = {e.v, e.weight};
    adjacency_[cursor[static_cast<std::size_t>(e.v)]++] = {e.u, e.weight};
  }
  node_weight_.assign(static_cast<std::size_t>(n), 0.0);
  for (int u = 0; u < n; ++u) {
    auto row = neighbors(u);
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offset_[static_cast<std::size_t>(u)]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offset_[static_cast<std::size_t>(u) + 1]));
    double w = 0.0;
    for (const auto& [v, weight] : row) w += weight;
    node_weight_[static_cast<std::size_t>(u)] = w;
  }
  total_weight_ = 0.0;
  for (double w : node_weight_) total_weight_ += w;

  // connectivity (BFS from node 0); isolated nodes cannot occur since every
  // node enters via an edge, but a multi-component edge list can
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const auto& [v, weight] : neighbors(queue[head])) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
      }
    }
  }
  for (int u = 0; u < n; ++u) {
    if (!seen[static_cast<std::size_t>(u)]) {
      throw DisconnectedGraphError(labels_[0], labels_[static_cast<std::size_t>(u)]);
    }
  }
}

void WeightedGraph::check_node(int u) const {
  if (u < 0 || u >= node_count()) {
    throw ValidationError("node id " + std::to_string(u) + " out of range");
  }
}

int WeightedGraph::find_label(const std::string& label) const {
  for (int u = 0; u < node_count(); ++u) {
    if (labels_[static_cast<std::size_t>(u)] == label) return u;
  }
  return -1;
}

std::span<const std::pair<int, double>> WeightedGraph::neighbors(int u) const {
  check_node(u);
  const std::size_t lo = adjacency_offset_[static_cast<std::size_t>(u)];
  const std::size_t hi = adjacency_offset_[static_cast<std::size_t>(u) + 1];
  return {adjacency_.data() + lo, hi - lo};
}

double WeightedGraph::edge_weight(int u, int v) const {
  check_node(u);
  check_node(v);
  auto row = neighbors(u);
  auto it = std::lower_bound(row.begin(), row.end(), v,
                             [](const std::pair<int, double>& entry, int node) { return entry.first < node; });
  if (it != row.end() && it->first == v) return it->second;
  return 0.0;
}

double WeightedGraph::pair_probability(int u, int v) const {
  return edge_weight(u, v) / total_weight_;
}

double WeightedGraph::node_probability(int u) const {
  check_node(u);
  return node_weight_[static_cast<std::size_t>(u)] / total_weight_;
}

double WeightedGraph::transition_probability(int u, int v) const {
  return edge_weight(u, v) / node_weight_[static_cast<std::size_t>(u)];
}

double WeightedGraph::cluster_cross_mass(std::span<const int> a, std::span<const int> b) const {
  if (a.empty() || b.empty()) throw ValidationError("cluster cross mass of an empty set");
  std::vector<char> in_b(static_cast<std::size_t>(node_count()), 0);
  for (int v : b) {
    check_node(v);
    in_b[static_cast<std::size_t>(v)] = 1;
  }
  double cross = 0.0;
  for (int u : a) {
    check_node(u);
    if (in_b[static_cast<std::size_t>(u)]) throw ValidationError("clusters overlap on node " + label(u));
    for (const auto& [v, weight] : neighbors(u)) {
      if (in_b[static_cast<std::size_t>(v)]) cross += weight;
    }
  }
  return 2.0 * cross / total_weight_;
}

NodePrior::NodePrior(PriorKind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  double sum = 0.0;
  for (double v : values_) {
    if (!(v > 0.0)) throw ValidationError("prior must be positive on every node");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("prior does not sum to 1 (off by " + std::to_string(sum - 1.0) + ")");
  }
}

NodePrior NodePrior::uniform(int n) {
  if (n <= 0) throw ValidationError("prior needs at least one node");
  return NodePrior(PriorKind::uniform, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
}

NodePrior NodePrior::degree(const WeightedGraph& g) {
  std::vector<double> values(static_cast<std::size_t>(g.node_count()));
  for (int u = 0; u < g.node_count(); ++u) {
    values[static_cast<std::size_t>(u)] = g.node_probability(u);
  }
  return NodePrior(PriorKind::degree, std::move(values));
}

NodePrior NodePrior::custom(std::vector<double> weights) {
  if (weights.empty()) throw ValidationError("prior needs at least one node");
  double sum = 0.0;
  for (double v : weights) {
    if (!(v > 0.0)) throw ValidationError("custom prior entries must be strictly positive");
    sum += v;
  }
  for (double& v : weights) v /= sum;
  return NodePrior(PriorKind::custom, std::move(weights));
}

NodePrior build_prior(const WeightedGraph& g, PriorKind kind, const std::vector<double>* custom) {
  switch (kind) {
    case PriorKind::uniform:
      return NodePrior::uniform(g.node_count());
    case PriorKind::degree:
      return NodePrior::degree(g);
    case PriorKind::custom:
      if (custom == nullptr || static_cast<int>(custom->size()) != g.node_count()) {
        throw ValidationError("custom prior needs one value per node");
      }
      return NodePrior::custom(*custom);
  }
  throw ValidationError("unknown prior kind");
}

double prior_mass(const NodePrior& prior, std::span<const int> members) {
  if (members.empty()) throw ValidationError("prior mass of an empty set");
  double mass = 0.0;
  for (int u : members) {
    if (u < 0 || u >= prior.size()) throw ValidationError("node id out of range");
    mass += prior[u];
  }
  return mass;
}

}  // namespace dendrograph
