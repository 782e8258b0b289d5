#pragma once

#include <string>
#include <vector>

#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"

namespace dendrograph {

// Decoder output: the complete weighted graph w_hat(u,v) = pi(u)pi(v)/d(u,v)
// rebuilt from a dendrogram and a prior, with its pair sampling
// distribution p_hat = w_hat / total.
class ReconstructedGraph {
public:
  int node_count() const { return n_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // w_hat(u,v) for u != v; strictly positive (finite heights, positive prior).
  double weight(int u, int v) const;
  // Total over ordered pairs, sum_{u!=v} w_hat(u,v).
  double total_weight() const { return total_; }
  // p_hat(u,v) = w_hat(u,v)/total; sums to 1 over ordered pairs.
  double probability(int u, int v) const { return weight(u, v) / total_; }

private:
  friend ReconstructedGraph reconstruct(const Dendrogram&, const NodePrior&, bool);

  int n_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> upper_;  // w_hat for u < v, row-major condensed
  double total_ = 0.0;
};

// The pair table rows are filled independently (parallelizable); the total
// is accumulated over value-sorted entries, so the result is bit-identical
// for any thread count and under leaf relabeling.
ReconstructedGraph reconstruct(const Dendrogram& d, const NodePrior& prior, bool parallel = true);

// Edge-list text (same format the graph parser reads) keeping pairs with
// w_hat >= threshold; weights at 12 significant digits, pairs in (u,v)
// order.
std::string export_reconstruction(const ReconstructedGraph& r, double threshold);

}  // namespace dendrograph
