#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"

namespace dendrograph {

// Heightless binary tree shape over leaf ids 0..n-1, in canonical form:
// joins are listed children-before-parents in post-order and each join puts
// the child holding the smaller leaf first. A child id < n_leaves is a
// leaf, otherwise it is n_leaves + join index.
struct TreeShape {
  int n_leaves = 0;
  std::vector<std::array<int, 2>> joins;

  friend bool operator==(const TreeShape&, const TreeShape&) = default;
};

// (2n-3)!!, the number of rooted binary tree shapes on n labeled leaves.
std::uint64_t tree_shape_count(int n);

// Depth-first enumeration by inserting leaf k into every edge (and above
// the root) of every (k-1)-leaf tree; exactly (2n-3)!! distinct shapes in a
// fixed order. Requires 2 <= n <= 9.
void for_each_tree_shape(int n, const std::function<void(const TreeShape&, std::uint64_t)>& fn);
std::vector<TreeShape> enumerate_tree_shapes(int n);

Dendrogram shape_to_dendrogram(const TreeShape& shape, std::vector<std::string> labels,
                               double height = 1.0);
TreeShape tree_shape_of(const Dendrogram& d);

// Nested-list form, e.g. [[0,2],1].
std::string shape_to_nested_json(const TreeShape& shape);

enum class OracleObjective { tree_objective, dasgupta };

struct OracleResult {
  TreeShape shape;
  double score;
  std::uint64_t n_shapes_searched;
};

// Ground truth by full enumeration: the shape maximizing the tree objective
// (or minimizing the Dasgupta cost), ties resolved to the first shape in
// enumeration order. Scores are computed through the metrics module. The
// parallel search splits shapes round-robin across threads and reduces by
// (score, enumeration index), so its result is schedule-independent and
// identical to the serial search. Requires n <= 9.
OracleResult exhaustive_optimum(const WeightedGraph& g, const NodePrior& prior,
                                OracleObjective objective, bool parallel = true);

}  // namespace dendrograph
