#include "dendrograph/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dendrograph/numformat.hpp"
#include "json.hpp"

namespace dendrograph {

namespace kernels {

double prior_over_distance_sum_serial(const double* dist, const double* pi, int n) {
  double sum = 0.0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      sum += pi[u] * pi[v] / dist[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)];
    }
  }
  return 2.0 * sum;
}

double prior_over_distance_sum_parallel(const double* dist, const double* pi, int n) {
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (int u = 0; u < n; ++u) {
    const double* row = dist + static_cast<std::size_t>(u) * static_cast<std::size_t>(n);
    double acc = 0.0;
    for (int v = u + 1; v < n; ++v) acc += pi[u] * pi[v] / row[v];
    partial[static_cast<std::size_t>(u)] = acc;
  }
  double sum = 0.0;
  for (int u = 0; u < n; ++u) sum += partial[static_cast<std::size_t>(u)];
  return 2.0 * sum;
}

}  // namespace kernels

namespace {

void check_compatible(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d) {
  if (prior.size() != g.node_count()) throw ValidationError("prior size does not match the graph");
  if (d.leaf_count() != g.node_count()) {
    throw ValidationError("dendrogram has " + std::to_string(d.leaf_count()) +
                          " leaves but the graph has " + std::to_string(g.node_count()) + " nodes");
  }
}

// Sum over edges of 2 p(u,v) f(u,v); covers every ordered pair with p > 0.
template <typename F>
double edge_pair_sum(const WeightedGraph& g, F&& f) {
  const double w = g.total_weight();
  double sum = 0.0;
  for (const Edge& e : g.edges()) sum += 2.0 * (e.weight / w) * f(e.u, e.v);
  return sum;
}

}  // namespace

InternalNodeTable internal_node_table(const WeightedGraph& g, const NodePrior& prior,
                                      const Dendrogram& d) {
  check_compatible(g, prior, d);
  const int n = d.leaf_count();
  InternalNodeTable table;
  table.mass.assign(static_cast<std::size_t>(n - 1), 0.0);
  table.prior_q.resize(static_cast<std::size_t>(n - 1));
  table.height.resize(static_cast<std::size_t>(n - 1));
  table.pi_left.resize(static_cast<std::size_t>(n - 1));
  table.pi_right.resize(static_cast<std::size_t>(n - 1));
  table.size_left.resize(static_cast<std::size_t>(n - 1));
  table.size_right.resize(static_cast<std::size_t>(n - 1));

  // subtree prior masses and sizes, children before parents
  std::vector<double> pi_sub(static_cast<std::size_t>(d.node_count()));
  std::vector<int> size_sub(static_cast<std::size_t>(d.node_count()));
  for (int u = 0; u < n; ++u) {
    pi_sub[static_cast<std::size_t>(u)] = prior[u];
    size_sub[static_cast<std::size_t>(u)] = 1;
  }
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = d.merges()[static_cast<std::size_t>(k)];
    pi_sub[static_cast<std::size_t>(n + k)] =
        pi_sub[static_cast<std::size_t>(m.left)] + pi_sub[static_cast<std::size_t>(m.right)];
    size_sub[static_cast<std::size_t>(n + k)] =
        size_sub[static_cast<std::size_t>(m.left)] + size_sub[static_cast<std::size_t>(m.right)];
    table.pi_left[static_cast<std::size_t>(k)] = pi_sub[static_cast<std::size_t>(m.left)];
    table.pi_right[static_cast<std::size_t>(k)] = pi_sub[static_cast<std::size_t>(m.right)];
    table.size_left[static_cast<std::size_t>(k)] = size_sub[static_cast<std::size_t>(m.left)];
    table.size_right[static_cast<std::size_t>(k)] = size_sub[static_cast<std::size_t>(m.right)];
    table.prior_q[static_cast<std::size_t>(k)] = 2.0 * pi_sub[static_cast<std::size_t>(m.left)] *
                                                 pi_sub[static_cast<std::size_t>(m.right)];
    table.height[static_cast<std::size_t>(k)] = m.height;
  }

  // every ordered pair's mass lands on its lowest common ancestor
  const double w = g.total_weight();
  for (const Edge& e : g.edges()) {
    const int lca = d.lowest_common_ancestor(e.u, e.v);
    table.mass[static_cast<std::size_t>(lca - n)] += 2.0 * e.weight / w;
  }
  return table;
}

double cost_j(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d) {
  check_compatible(g, prior, d);
  const int n = g.node_count();
  const std::vector<double> dist = d.ultrametric_matrix();
  const double log_term = edge_pair_sum(g, [&](int u, int v) {
    return std::log(dist[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)]);
  });
  const double norm =
      kernels::prior_over_distance_sum_parallel(dist.data(), prior.values().data(), n);
  return log_term + std::log(norm);
}

double cost_j_cluster_form(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d) {
  const InternalNodeTable table = internal_node_table(g, prior, d);
  double log_term = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < table.mass.size(); ++k) {
    if (table.mass[k] > 0.0) log_term += table.mass[k] * std::log(table.height[k]);
    norm += table.prior_q[k] / table.height[k];
  }
  return log_term + std::log(norm);
}

Dendrogram optimal_heights(const WeightedGraph& g, const NodePrior& prior,
                           const Dendrogram& shape) {
  const InternalNodeTable table = internal_node_table(g, prior, shape);
  std::vector<double> heights(table.mass.size());
  for (std::size_t k = 0; k < table.mass.size(); ++k) {
    if (table.mass[k] == 0.0) {
      throw UnrepresentableTreeError(
          "internal node " + std::to_string(shape.leaf_count() + static_cast<int>(k)) +
          " separates parts with no cross edge; its optimal height is infinite");
    }
    heights[k] = table.prior_q[k] / table.mass[k];
  }
  return shape.with_heights(std::move(heights));
}

double tree_objective(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& shape) {
  const InternalNodeTable table = internal_node_table(g, prior, shape);
  double sum = 0.0;
  for (std::size_t k = 0; k < table.mass.size(); ++k) {
    if (table.mass[k] > 0.0) sum += table.mass[k] * std::log(table.mass[k] / table.prior_q[k]);
  }
  return sum;
}

double kl_reconstruction(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d) {
  check_compatible(g, prior, d);
  const int n = g.node_count();
  const std::vector<double> dist = d.ultrametric_matrix();
  // D = sum p log( p d(u,v) / (pi(u)pi(v)) ) + log(total reconstructed mass),
  // since the p-weighted sum of the constant log-total is the log-total
  const double w = g.total_weight();
  const double main_term = edge_pair_sum(g, [&](int u, int v) {
    const double p = g.edge_weight(u, v) / w;
    const double duv =
        dist[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)];
    return std::log(p * duv / (prior[u] * prior[v]));
  });
  const double norm =
      kernels::prior_over_distance_sum_parallel(dist.data(), prior.values().data(), n);
  return main_term + std::log(norm);
}

double graph_prior_divergence(const WeightedGraph& g, const NodePrior& prior) {
  if (prior.size() != g.node_count()) throw ValidationError("prior size does not match the graph");
  const double w = g.total_weight();
  return edge_pair_sum(g, [&](int u, int v) {
    const double p = g.edge_weight(u, v) / w;
    return std::log(p / (prior[u] * prior[v]));
  });
}

double dasgupta_cost(const WeightedGraph& g, const Dendrogram& shape) {
  if (shape.leaf_count() != g.node_count()) {
    throw ValidationError("dendrogram leaf count does not match the graph");
  }
  const int n = g.node_count();
  std::vector<int> size_sub(static_cast<std::size_t>(shape.node_count()), 1);
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = shape.merges()[static_cast<std::size_t>(k)];
    size_sub[static_cast<std::size_t>(n + k)] =
        size_sub[static_cast<std::size_t>(m.left)] + size_sub[static_cast<std::size_t>(m.right)];
  }
  const double w = g.total_weight();
  double cost = 0.0;
  for (const Edge& e : g.edges()) {
    const int lca = shape.lowest_common_ancestor(e.u, e.v);
    cost += 2.0 * (e.weight / w) * size_sub[static_cast<std::size_t>(lca)];
  }
  return cost;
}

GeneralizedCosts generalized_costs(const WeightedGraph& g, const NodePrior& prior,
                                   const Dendrogram& shape) {
  const InternalNodeTable table = internal_node_table(g, prior, shape);
  GeneralizedCosts costs{0.0, 0.0};
  for (std::size_t k = 0; k < table.mass.size(); ++k) {
    if (table.mass[k] == 0.0) continue;
    costs.log_cost += table.mass[k] * (std::log(table.pi_left[k]) + std::log(table.pi_right[k]));
    costs.pi_weighted += table.mass[k] * (table.pi_left[k] + table.pi_right[k]);
  }
  return costs;
}

namespace {

std::vector<int> block_index_of(const Partition& partition, int n) {
  std::vector<int> block(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
    if (partition.blocks[b].empty()) throw ValidationError("partition contains an empty block");
    for (int u : partition.blocks[b]) {
      if (u < 0 || u >= n) throw ValidationError("partition node id out of range");
      if (block[static_cast<std::size_t>(u)] != -1) {
        throw ValidationError("partition blocks overlap on node " + std::to_string(u));
      }
      block[static_cast<std::size_t>(u)] = static_cast<int>(b);
    }
  }
  for (int u = 0; u < n; ++u) {
    if (block[static_cast<std::size_t>(u)] == -1) {
      throw ValidationError("partition does not cover node " + std::to_string(u));
    }
  }
  return block;
}

}  // namespace

double modularity(const WeightedGraph& g, const NodePrior& prior, const Partition& partition,
                  double gamma) {
  if (prior.size() != g.node_count()) throw ValidationError("prior size does not match the graph");
  if (gamma < 0.0) throw ValidationError("resolution must be non-negative");
  const std::vector<int> block = block_index_of(partition, g.node_count());
  const double w = g.total_weight();
  double intra_mass = 0.0;
  for (const Edge& e : g.edges()) {
    if (block[static_cast<std::size_t>(e.u)] == block[static_cast<std::size_t>(e.v)]) {
      intra_mass += 2.0 * e.weight / w;
    }
  }
  double prior_term = 0.0;
  for (const auto& members : partition.blocks) {
    double pi_c = 0.0;
    for (int u : members) pi_c += prior[u];
    prior_term += pi_c * pi_c;
  }
  return intra_mass - gamma * prior_term;
}

MaxResolution max_resolution(const WeightedGraph& g, const NodePrior& prior,
                             const Partition& partition) {
  if (partition.blocks.size() < 2) {
    throw ValidationError("max resolution needs at least two blocks");
  }
  const std::vector<int> block = block_index_of(partition, g.node_count());
  const std::size_t b = partition.blocks.size();
  std::vector<double> cross(b * b, 0.0);
  const double w = g.total_weight();
  for (const Edge& e : g.edges()) {
    const std::size_t bu = static_cast<std::size_t>(block[static_cast<std::size_t>(e.u)]);
    const std::size_t bv = static_cast<std::size_t>(block[static_cast<std::size_t>(e.v)]);
    if (bu == bv) continue;
    cross[bu * b + bv] += 2.0 * e.weight / w;
    cross[bv * b + bu] += 2.0 * e.weight / w;
  }
  std::vector<double> pi_block(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (int u : partition.blocks[i]) pi_block[i] += prior[u];
  }

  // same scan order and tie tolerance as the greedy merge selection
  MaxResolution best{-1.0, 0, 0};
  bool found = false;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      const double s = linkage_similarity(cross[i * b + j], pi_block[i], pi_block[j]);
      const bool tie = std::abs(s - best.value) <= 1e-12 * std::max(std::abs(s), std::abs(best.value));
      if (!found || (s > best.value && !tie)) {
        best = {s, i, j};
        found = true;
      }
    }
  }
  return best;
}

ScoreReport score_report(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d) {
  ScoreReport report;
  report.cost_j = cost_j(g, prior, d);
  report.tree_objective = tree_objective(g, prior, d);
  report.kl_reconstruction = kl_reconstruction(g, prior, d);
  report.dasgupta = dasgupta_cost(g, d);
  report.log_cost = generalized_costs(g, prior, d).log_cost;
  const InternalNodeTable table = internal_node_table(g, prior, d);
  report.internal_nodes.reserve(table.mass.size());
  for (std::size_t k = 0; k < table.mass.size(); ++k) {
    report.internal_nodes.push_back({table.mass[k], table.prior_q[k], table.height[k]});
  }
  return report;
}

std::string to_json(const ScoreReport& report) {
  nlohmann::json j;
  j["cost_J"] = round_to_significant(report.cost_j);
  j["tree_objective"] = round_to_significant(report.tree_objective);
  j["kl_reconstruction"] = round_to_significant(report.kl_reconstruction);
  j["dasgupta"] = round_to_significant(report.dasgupta);
  j["log_cost"] = round_to_significant(report.log_cost);
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& row : report.internal_nodes) {
    nodes.push_back({{"p", round_to_significant(row.p)},
                     {"q", round_to_significant(row.q)},
                     {"height", round_to_significant(row.height)}});
  }
  j["internal_nodes"] = std::move(nodes);
  return j.dump();
}

}  // namespace dendrograph
