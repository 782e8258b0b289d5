#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dendrograph/clustering.hpp"
#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"

namespace dendrograph {

// Quality functionals of a (graph, prior, dendrogram) triple. All values
// are in nats (natural logarithm throughout); 0*log 0 terms contribute 0.

// Per-internal-node masses of a tree shape against a graph and prior:
// mass = p(A,B) = 2 w(A,B)/w, prior_q = q(A,B) = 2 pi(A) pi(B). Row k
// describes the internal node created by merge k.
struct InternalNodeTable {
  std::vector<double> mass;
  std::vector<double> prior_q;
  std::vector<double> height;
  std::vector<double> pi_left, pi_right;
  std::vector<int> size_left, size_right;
};

InternalNodeTable internal_node_table(const WeightedGraph& g, const NodePrior& prior,
                                      const Dendrogram& d);

// Reconstruction cost J(d) = sum_{u!=v} p(u,v) log d(u,v)
//                          + log( sum_{u!=v} pi(u)pi(v)/d(u,v) ),
// evaluated in its pairwise form. Scale-invariant: J(alpha d) = J(d).
double cost_j(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d);

// Same quantity regrouped per internal node:
// sum_I p(A,B) log d(A,B) + log( sum_I q(A,B)/d(A,B) ).
// Agrees with cost_j up to accumulated rounding; kept as an independent
// evaluation route.
double cost_j_cluster_form(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d);

// Heights minimizing J for a fixed tree shape: d(A,B) = q(A,B)/p(A,B)
// (multiplicative constant fixed to 1, which makes the second J term
// vanish). Throws UnrepresentableTreeError when some internal node has
// p(A,B) = 0. The result is not necessarily regular for an arbitrary
// shape; check .regular() on the output.
Dendrogram optimal_heights(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& shape);

// sum_I p(A,B) log( p(A,B) / q(A,B) ): the divergence between cluster-pair
// sampling under the graph and under the prior; heights are ignored.
// Maximizing this over shapes is equivalent to minimizing J at optimal
// heights: cost_j(optimal_heights(T)) == -tree_objective(T).
double tree_objective(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& shape);

// D(p || p_hat) where p_hat is the pair distribution of the reconstructed
// graph w_hat(u,v) = pi(u)pi(v)/d(u,v). Non-negative; invariant to height
// scaling.
double kl_reconstruction(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d);

// Tree-independent constant I = sum_{u!=v} p(u,v) log( p(u,v)/(pi(u)pi(v)) );
// kl_reconstruction at optimal heights equals I - tree_objective.
double graph_prior_divergence(const WeightedGraph& g, const NodePrior& prior);

// sum_I p(A,B) (|A| + |B|): the expected leaf count of the smallest
// hierarchy cluster containing an edge-sampled node pair. Lower is better.
// Probability-normalized; the unnormalized weighted form differs by the
// constant factor w.
double dasgupta_cost(const WeightedGraph& g, const Dendrogram& shape);

struct GeneralizedCosts {
  double log_cost;     // sum_I p(A,B) (log pi(A) + log pi(B))
  double pi_weighted;  // sum_I p(A,B) (pi(A) + pi(B)); (1/n) * dasgupta under a uniform prior
};

GeneralizedCosts generalized_costs(const WeightedGraph& g, const NodePrior& prior,
                                   const Dendrogram& shape);

// Q_gamma = sum_{C in P} sum_{u,v in C} ( p(u,v) - gamma pi(u) pi(v) ),
// ordered pairs including u = v (p(u,u) = 0, the pi(u)^2 term is kept).
double modularity(const WeightedGraph& g, const NodePrior& prior, const Partition& partition,
                  double gamma = 1.0);

struct MaxResolution {
  double value;                  // max over distinct blocks of p(A,B)/(pi(A)pi(B))
  std::size_t block_a, block_b;  // argmax pair, indices into partition.blocks
};

// Largest resolution at which merging two blocks of the partition still
// improves modularity, with its argmax pair. Same mass convention and
// tie-break as the greedy linkage, so the returned pair is the next greedy
// merge. Throws ValidationError on a single-block partition.
MaxResolution max_resolution(const WeightedGraph& g, const NodePrior& prior,
                             const Partition& partition);

struct ScoreReport {
  double cost_j;
  double tree_objective;
  double kl_reconstruction;
  double dasgupta;
  double log_cost;
  struct NodeRow {
    double p, q, height;
  };
  std::vector<NodeRow> internal_nodes;
};

ScoreReport score_report(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& d);

// {"cost_J", "tree_objective", "kl_reconstruction", "dasgupta", "log_cost",
//  "internal_nodes": [{"p", "q", "height"}...]}, numbers at 12 significant
// digits.
std::string to_json(const ScoreReport& report);

namespace kernels {

// sum over ordered pairs u != v of pi(u) pi(v) / dist(u,v), dist row-major
// n*n. The parallel version accumulates per-row partials and reduces them
// in row order, so the result does not depend on the thread count; the
// serial version is the plain reference loop.
double prior_over_distance_sum_serial(const double* dist, const double* pi, int n);
double prior_over_distance_sum_parallel(const double* dist, const double* pi, int n);

}  // namespace kernels

}  // namespace dendrograph
