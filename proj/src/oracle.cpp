#include "dendrograph/oracle.hpp"

#include <algorithm>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dendrograph/metrics.hpp"
#include "json.hpp"

namespace dendrograph {

namespace {

constexpr int kMaxOracleLeaves = 9;

void check_leaf_count(int n) {
  if (n < 2 || n > kMaxOracleLeaves) {
    throw ValidationError("tree shape enumeration supports 2 <= n <= " +
                          std::to_string(kMaxOracleLeaves) +
                          " ((2n-3)!! shapes grow too fast beyond that); got n = " +
                          std::to_string(n));
  }
}

// Mutable tree under enumeration: leaves 0..n-1, internal ids n..2n-2 in
// insertion order.
struct MutableTree {
  int n;
  int root;
  std::vector<int> left, right, parent;

  explicit MutableTree(int leaves)
      : n(leaves),
        root(leaves),
        left(static_cast<std::size_t>(2 * leaves - 1), -1),
        right(static_cast<std::size_t>(2 * leaves - 1), -1),
        parent(static_cast<std::size_t>(2 * leaves - 1), -1) {
    left[static_cast<std::size_t>(n)] = 0;
    right[static_cast<std::size_t>(n)] = 1;
    parent[0] = n;
    parent[1] = n;
  }
};

// Canonical join list: post-order, smaller min-leaf child first.
template <typename Left, typename Right>
TreeShape canonical_shape(int n, int root, Left&& left_of, Right&& right_of) {
  TreeShape shape;
  shape.n_leaves = n;
  shape.joins.reserve(static_cast<std::size_t>(n - 1));
  // returns {canonical id, min leaf}
  auto walk = [&](auto&& self, int node) -> std::pair<int, int> {
    if (node < n) return {node, node};
    auto [lid, lmin] = self(self, left_of(node));
    auto [rid, rmin] = self(self, right_of(node));
    if (rmin < lmin) {
      std::swap(lid, rid);
      std::swap(lmin, rmin);
    }
    shape.joins.push_back({lid, rid});
    return {n + static_cast<int>(shape.joins.size()) - 1, lmin};
  };
  walk(walk, root);
  return shape;
}

TreeShape shape_of_mutable(const MutableTree& t) {
  return canonical_shape(
      t.n, t.root, [&](int v) { return t.left[static_cast<std::size_t>(v)]; },
      [&](int v) { return t.right[static_cast<std::size_t>(v)]; });
}

// Depth-first over insertion points; fn sees the tree only while complete.
template <typename Fn>
void enumerate(MutableTree& t, int next_leaf, std::uint64_t& index, Fn&& fn) {
  if (next_leaf == t.n) {
    fn(t, index++);
    return;
  }
  const int nn = t.n + next_leaf - 1;  // internal node created for this leaf
  auto recurse = [&] { enumerate(t, next_leaf + 1, index, fn); };

  // subdivide the edge above each existing non-root node, in id order
  auto subdivide = [&](int c) {
    const int p = t.parent[static_cast<std::size_t>(c)];
    (t.left[static_cast<std::size_t>(p)] == c ? t.left[static_cast<std::size_t>(p)]
                                              : t.right[static_cast<std::size_t>(p)]) = nn;
    t.left[static_cast<std::size_t>(nn)] = c;
    t.right[static_cast<std::size_t>(nn)] = next_leaf;
    t.parent[static_cast<std::size_t>(nn)] = p;
    t.parent[static_cast<std::size_t>(c)] = nn;
    t.parent[static_cast<std::size_t>(next_leaf)] = nn;
    recurse();
    (t.left[static_cast<std::size_t>(p)] == nn ? t.left[static_cast<std::size_t>(p)]
                                               : t.right[static_cast<std::size_t>(p)]) = c;
    t.parent[static_cast<std::size_t>(c)] = p;
    t.parent[static_cast<std::size_t>(nn)] = -1;
    t.parent[static_cast<std::size_t>(next_leaf)] = -1;
  };
  for (int c = 0; c < next_leaf; ++c) subdivide(c);
  for (int c = t.n; c < nn; ++c) {
    if (c != t.root) subdivide(c);
  }

  // new root above the old one
  const int old_root = t.root;
  t.left[static_cast<std::size_t>(nn)] = old_root;
  t.right[static_cast<std::size_t>(nn)] = next_leaf;
  t.parent[static_cast<std::size_t>(old_root)] = nn;
  t.parent[static_cast<std::size_t>(next_leaf)] = nn;
  t.root = nn;
  recurse();
  t.root = old_root;
  t.parent[static_cast<std::size_t>(old_root)] = -1;
  t.parent[static_cast<std::size_t>(next_leaf)] = -1;
  t.parent[static_cast<std::size_t>(nn)] = -1;
}

template <typename Fn>
void enumerate_mutable(int n, Fn&& fn) {
  check_leaf_count(n);
  MutableTree t(n);
  std::uint64_t index = 0;
  if (n == 2) {
    fn(t, index);
    return;
  }
  enumerate(t, 2, index, fn);
}

}  // namespace

std::uint64_t tree_shape_count(int n) {
  check_leaf_count(n);
  std::uint64_t count = 1;
  for (int k = 3; k <= n; ++k) count *= static_cast<std::uint64_t>(2 * k - 3);
  return count;
}

void for_each_tree_shape(int n, const std::function<void(const TreeShape&, std::uint64_t)>& fn) {
  enumerate_mutable(n, [&](const MutableTree& t, std::uint64_t index) {
    fn(shape_of_mutable(t), index);
  });
}

std::vector<TreeShape> enumerate_tree_shapes(int n) {
  std::vector<TreeShape> shapes;
  shapes.reserve(tree_shape_count(n));
  for_each_tree_shape(n, [&](const TreeShape& shape, std::uint64_t) { shapes.push_back(shape); });
  return shapes;
}

Dendrogram shape_to_dendrogram(const TreeShape& shape, std::vector<std::string> labels,
                               double height) {
  if (static_cast<int>(labels.size()) != shape.n_leaves) {
    throw ValidationError("label count does not match the shape");
  }
  std::vector<Merge> merges;
  merges.reserve(shape.joins.size());
  for (const auto& join : shape.joins) merges.push_back({join[0], join[1], height});
  return Dendrogram::from_merges(std::move(labels), std::move(merges));
}

TreeShape tree_shape_of(const Dendrogram& d) {
  const int n = d.leaf_count();
  if (n < 2) throw ValidationError("tree shape needs at least two leaves");
  return canonical_shape(
      n, d.root(), [&](int v) { return d.merges()[static_cast<std::size_t>(v - n)].left; },
      [&](int v) { return d.merges()[static_cast<std::size_t>(v - n)].right; });
}

namespace {

nlohmann::json shape_node_json(const TreeShape& shape, int node) {
  if (node < shape.n_leaves) return node;
  const auto& join = shape.joins[static_cast<std::size_t>(node - shape.n_leaves)];
  return nlohmann::json::array({shape_node_json(shape, join[0]), shape_node_json(shape, join[1])});
}

}  // namespace

std::string shape_to_nested_json(const TreeShape& shape) {
  return shape_node_json(shape, shape.n_leaves + static_cast<int>(shape.joins.size()) - 1).dump();
}

namespace {

struct Candidate {
  double score = 0.0;
  std::uint64_t index = 0;
  TreeShape shape;
  bool valid = false;
};

// maximize score; ties to the smaller enumeration index
bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.score != b.score) return a.score > b.score;
  return a.index < b.index;
}

}  // namespace

OracleResult exhaustive_optimum(const WeightedGraph& g, const NodePrior& prior,
                                OracleObjective objective, bool parallel) {
  const int n = g.node_count();
  check_leaf_count(n);
  if (prior.size() != n) throw ValidationError("prior size does not match the graph");

  auto evaluate = [&](const MutableTree& t) {
    const TreeShape shape = shape_of_mutable(t);
    const Dendrogram d = shape_to_dendrogram(shape, g.labels());
    const double score = objective == OracleObjective::tree_objective
                             ? tree_objective(g, prior, d)
                             : -dasgupta_cost(g, d);
    return std::pair<TreeShape, double>(shape, score);
  };

  Candidate best;
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel
    {
      const std::uint64_t stride = static_cast<std::uint64_t>(omp_get_num_threads());
      const std::uint64_t offset = static_cast<std::uint64_t>(omp_get_thread_num());
      Candidate local;
      enumerate_mutable(n, [&](const MutableTree& t, std::uint64_t index) {
        if (index % stride != offset) return;
        auto [shape, score] = evaluate(t);
        Candidate c{score, index, std::move(shape), true};
        if (better(c, local)) local = std::move(c);
      });
#pragma omp critical
      {
        if (better(local, best)) best = std::move(local);
      }
    }
  }
#endif
  if (!best.valid) {
    enumerate_mutable(n, [&](const MutableTree& t, std::uint64_t index) {
      auto [shape, score] = evaluate(t);
      Candidate c{score, index, std::move(shape), true};
      if (better(c, best)) best = std::move(c);
    });
  }

  OracleResult result;
  result.shape = std::move(best.shape);
  result.score = objective == OracleObjective::tree_objective ? best.score : -best.score;
  result.n_shapes_searched = tree_shape_count(n);
  return result;
}

}  // namespace dendrograph
