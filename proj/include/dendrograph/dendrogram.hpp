#pragma once

#include <string>
#include <vector>

#include "dendrograph/errors.hpp"

namespace dendrograph {

// One agglomeration step. Children are tree-node ids: leaves 0..n-1, the
// k-th merge creates internal node id n+k.
struct Merge {
  int left;
  int right;
  double height;

  friend bool operator==(const Merge&, const Merge&) = default;
};

// Rooted binary tree over the n graph nodes with a positive height per
// internal node; encodes the ultrametric d(u,v) = height of the lowest
// common ancestor.
//
// Construction validates tree structure and height positivity. Regularity
// (no node higher than an ancestor) is tracked as a flag rather than
// enforced, so that re-optimized heights of an arbitrary tree shape can be
// represented; deserialize rejects irregular input.
class Dendrogram {
public:
  static Dendrogram from_merges(std::vector<std::string> labels, std::vector<Merge> merges);

  int leaf_count() const { return static_cast<int>(labels_.size()); }
  int node_count() const { return 2 * leaf_count() - 1; }
  int root() const { return node_count() - 1; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Merge>& merges() const { return merges_; }

  bool regular() const { return regular_; }
  // Height of internal node id in [leaf_count(), node_count()).
  double height(int node) const { return merges_[static_cast<std::size_t>(node - leaf_count())].height; }
  double max_height() const;
  // Parent node id; -1 for the root.
  int parent(int node) const { return parent_[static_cast<std::size_t>(node)]; }

  // d(u,v) for distinct leaves. Throws ValidationError when u == v.
  double ultrametric_distance(int u, int v) const;
  // Lowest common ancestor of two distinct leaves.
  int lowest_common_ancestor(int u, int v) const;
  // Full n*n distance matrix (row-major, zero diagonal) filled in one tree
  // traversal; internal nodes write disjoint index pairs, so the fill is
  // parallelized over them.
  std::vector<double> ultrametric_matrix(bool parallel = true) const;

  // Leaves below each tree node, grouped contiguously: leaf_span(node)
  // indexes into leaf_order().
  const std::vector<int>& leaf_order() const { return leaf_order_; }
  std::pair<int, int> leaf_span(int node) const {
    return {span_lo_[static_cast<std::size_t>(node)], span_hi_[static_cast<std::size_t>(node)]};
  }
  std::vector<int> leaves_below(int node) const;

  Dendrogram scaled(double alpha) const;
  Dendrogram with_heights(std::vector<double> heights) const;
  // Permutes leaf ids so that labels() == target afterwards. Throws
  // ValidationError when the label sets differ.
  Dendrogram relabeled(const std::vector<std::string>& target) const;

private:
  Dendrogram() = default;
  void finalize();  // parents, leaf spans, regularity

  std::vector<std::string> labels_;
  std::vector<Merge> merges_;
  std::vector<int> parent_;
  std::vector<int> leaf_order_;
  std::vector<int> span_lo_, span_hi_;
  bool regular_ = true;
};

// Ultrametric triple check d(u,v) <= max(d(u,x), d(v,x)): exhaustive for
// n <= 60, otherwise 1e5 sampled triples (fixed seed).
bool check_ultrametric(const Dendrogram& d);

// Flat clustering; blocks are disjoint node-id sets covering all leaves.
struct Partition {
  std::vector<std::vector<int>> blocks;
};

// Keeps all but the k-1 highest merges (equal heights: later merge index
// removed first) and returns the leaf sets of the remaining subtrees,
// ordered by smallest member.
Partition cut_k(const Dendrogram& d, int k);
// Maximal subtrees whose internal heights are all <= h, plus uncovered
// leaves as singletons.
Partition cut_height(const Dendrogram& d, double h);

// Canonical JSON form {"n_leaves", "labels", "merges"}; exact round trip.
std::string to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(const std::string& text);

// Newick with branch lengths height(parent) - height(child), leaves at
// height 0. Lossy: leaf ids are reassigned in tree order on re-import and
// tied heights may reorder merges; JSON is the canonical format.
std::string to_newick(const Dendrogram& d);
Dendrogram dendrogram_from_newick(const std::string& text);

}  // namespace dendrograph
