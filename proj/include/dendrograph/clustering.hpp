#pragma once

#include <functional>
#include <vector>

#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"

namespace dendrograph {

// Inter-cluster similarity sigma(A,B) = p(A,B) / (pi(A) pi(B)), evaluated on
// the symmetric cross mass p(A,B) = 2 w(A,B) / w, i.e. cross_mass / (2 pi_a pi_b).
// The height of a merge is its reciprocal.
double linkage_similarity(double cross_mass, double pi_a, double pi_b);

// sigma(A u B, C) as the pi-weighted convex combination of sigma(A,C) and
// sigma(B,C); equals linkage_similarity of the merged masses in exact
// arithmetic.
double merge_update(double sigma_ac, double sigma_bc, double pi_a, double pi_b);

// Active clusters of a running agglomeration: member lists, prior masses
// (compensated summation) and the dense symmetric cross-mass table, all
// keyed by cluster id (leaves 0..n-1, the k-th merge creates id n+k).
class ClusterState {
public:
  ClusterState(const WeightedGraph& g, const NodePrior& prior);

  const std::vector<int>& active_ids() const { return active_; }  // ascending
  double pi(int cluster_id) const;
  double cross_mass(int id_a, int id_b) const;  // symmetric p(A,B)
  double sigma(int id_a, int id_b) const;
  // Merge height 2 pi(A) pi(B) / p(A,B); exact on dyadic-rational inputs.
  double merge_height(int id_a, int id_b) const;
  const std::vector<int>& members(int cluster_id) const;
  int min_leaf(int cluster_id) const;

  // Merges two active clusters; masses combine additively, prior masses by
  // compensated summation. Returns the new cluster id.
  int merge(int id_a, int id_b);

  const WeightedGraph& graph() const { return *graph_; }

private:
  int slot(int cluster_id) const;

  const WeightedGraph* graph_;
  int n_;
  std::vector<int> active_;
  std::vector<int> slot_of_id_;
  std::vector<int> id_of_slot_;
  std::vector<double> pi_, pi_comp_;
  std::vector<int> min_leaf_;
  std::vector<std::vector<int>> members_;
  std::vector<double> mass_;  // n*n, slot-indexed symmetric cross masses
  int next_id_;
};

// State handed to the audit observer before each merge.
struct MergeStep {
  // Active clusters in ascending id order, as member lists.
  const std::vector<std::vector<int>>& partition;
  std::size_t block_a, block_b;  // indices into partition of the merged pair
  double sigma;
  double height;
};

// Per-merge self checks, filled when passed to an agglomeration run:
// cached masses vs. recomputation from the graph, the convex-combination
// update vs. the cached linkage, and the reducibility inequality.
struct AgglomerationAudit {
  double max_mass_rel_err = 0.0;
  double max_update_rel_err = 0.0;
  double max_reducibility_excess = 0.0;  // sigma(AuB,C) - max(sigma(A,C), sigma(B,C))
  std::function<void(const MergeStep&)> on_step;
};

// Greedy agglomeration: repeatedly merges the active pair with maximal
// linkage. Exact ties go to the pair with the lexicographically smallest
// (min leaf, min leaf) key, a refinement that keeps the comparison a
// reducible strict total order. O(n^3); the reference implementation.
Dendrogram agglomerate_naive(const WeightedGraph& g, const NodePrior& prior,
                             AgglomerationAudit* audit = nullptr);

// Nearest-neighbor chain: O(n^2) on the dense similarity table, valid
// because the linkage is reducible. Uses the same total order as
// agglomerate_naive and therefore produces the identical merge list,
// linkage ties included.
Dendrogram agglomerate_nn_chain(const WeightedGraph& g, const NodePrior& prior,
                                AgglomerationAudit* audit = nullptr);

}  // namespace dendrograph
