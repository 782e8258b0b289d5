#include "dendrograph/dendrogram.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "json.hpp"

namespace dendrograph {

Dendrogram Dendrogram::from_merges(std::vector<std::string> labels, std::vector<Merge> merges) {
  Dendrogram d;
  d.labels_ = std::move(labels);
  d.merges_ = std::move(merges);
  const int n = d.leaf_count();
  if (n < 1) throw ValidationError("dendrogram needs at least one leaf");
  if (static_cast<int>(d.merges_.size()) != n - 1) {
    throw ValidationError("expected " + std::to_string(n - 1) + " merges, got " +
                          std::to_string(d.merges_.size()));
  }
  d.finalize();
  return d;
}

void Dendrogram::finalize() {
  const int n = leaf_count();
  const int total = node_count();
  parent_.assign(static_cast<std::size_t>(total), -1);
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = merges_[static_cast<std::size_t>(k)];
    if (!(m.height > 0.0) || !std::isfinite(m.height)) {
      throw ValidationError("merge " + std::to_string(k) + ": non-positive height");
    }
    for (int child : {m.left, m.right}) {
      if (child < 0 || child >= n + k) {
        throw ValidationError("merge " + std::to_string(k) + ": child id " +
                              std::to_string(child) + " out of range");
      }
      if (parent_[static_cast<std::size_t>(child)] != -1) {
        throw ValidationError("node " + std::to_string(child) + " has two parents");
      }
      parent_[static_cast<std::size_t>(child)] = n + k;
    }
    if (m.left == m.right) {
      throw ValidationError("merge " + std::to_string(k) + ": identical children");
    }
  }
  for (int node = 0; node < total - 1; ++node) {
    if (parent_[static_cast<std::size_t>(node)] == -1) {
      throw ValidationError("node " + std::to_string(node) + " is not attached to the tree");
    }
  }

  regular_ = true;
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = merges_[static_cast<std::size_t>(k)];
    for (int child : {m.left, m.right}) {
      if (child >= n && height(child) > m.height) regular_ = false;
    }
  }

  // leaf spans: iterative DFS from the root, left child first
  leaf_order_.clear();
  leaf_order_.reserve(static_cast<std::size_t>(n));
  span_lo_.assign(static_cast<std::size_t>(total), 0);
  span_hi_.assign(static_cast<std::size_t>(total), 0);
  if (n == 1) {
    leaf_order_.push_back(0);
    span_hi_[0] = 1;
    return;
  }
  struct Frame {
    int node;
    bool expanded;
  };
  std::vector<Frame> stack{{root(), false}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.node < n) {
      span_lo_[static_cast<std::size_t>(f.node)] = static_cast<int>(leaf_order_.size());
      leaf_order_.push_back(f.node);
      span_hi_[static_cast<std::size_t>(f.node)] = static_cast<int>(leaf_order_.size());
      continue;
    }
    const Merge& m = merges_[static_cast<std::size_t>(f.node - n)];
    if (!f.expanded) {
      span_lo_[static_cast<std::size_t>(f.node)] = static_cast<int>(leaf_order_.size());
      stack.push_back({f.node, true});
      stack.push_back({m.right, false});
      stack.push_back({m.left, false});
    } else {
      span_hi_[static_cast<std::size_t>(f.node)] = static_cast<int>(leaf_order_.size());
    }
  }
}

double Dendrogram::max_height() const {
  double h = 0.0;
  for (const Merge& m : merges_) h = std::max(h, m.height);
  return h;
}

int Dendrogram::lowest_common_ancestor(int u, int v) const {
  const int n = leaf_count();
  if (u < 0 || u >= n || v < 0 || v >= n) throw ValidationError("leaf id out of range");
  if (u == v) throw ValidationError("lowest common ancestor of a leaf with itself");
  // a node's leaf span contains the spans of all its descendants, so climb
  // from u until v's span nests inside
  int a = u;
  while (!(span_lo_[static_cast<std::size_t>(a)] <= span_lo_[static_cast<std::size_t>(v)] &&
           span_hi_[static_cast<std::size_t>(v)] <= span_hi_[static_cast<std::size_t>(a)])) {
    a = parent_[static_cast<std::size_t>(a)];
  }
  return a;
}

double Dendrogram::ultrametric_distance(int u, int v) const {
  return height(lowest_common_ancestor(u, v));
}

std::vector<double> Dendrogram::ultrametric_matrix(bool parallel) const {
  const int n = leaf_count();
  std::vector<double> dist(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  double* out = dist.data();
  const int* order = leaf_order_.data();

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = merges_[static_cast<std::size_t>(k)];
    const double h = m.height;
    const auto [llo, lhi] = leaf_span(m.left);
    const auto [rlo, rhi] = leaf_span(m.right);
    for (int i = llo; i < lhi; ++i) {
      const std::size_t u = static_cast<std::size_t>(order[i]);
      for (int j = rlo; j < rhi; ++j) {
        const std::size_t v = static_cast<std::size_t>(order[j]);
        out[u * static_cast<std::size_t>(n) + v] = h;
        out[v * static_cast<std::size_t>(n) + u] = h;
      }
    }
  }
  return dist;
}

std::vector<int> Dendrogram::leaves_below(int node) const {
  const auto [lo, hi] = leaf_span(node);
  std::vector<int> leaves(leaf_order_.begin() + lo, leaf_order_.begin() + hi);
  std::sort(leaves.begin(), leaves.end());
  return leaves;
}

Dendrogram Dendrogram::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw ValidationError("scale factor must be positive");
  std::vector<Merge> merges = merges_;
  for (Merge& m : merges) m.height *= alpha;
  return from_merges(labels_, std::move(merges));
}

Dendrogram Dendrogram::with_heights(std::vector<double> heights) const {
  if (heights.size() != merges_.size()) throw ValidationError("height count mismatch");
  std::vector<Merge> merges = merges_;
  for (std::size_t k = 0; k < merges.size(); ++k) merges[k].height = heights[k];
  return from_merges(labels_, std::move(merges));
}

Dendrogram Dendrogram::relabeled(const std::vector<std::string>& target) const {
  const int n = leaf_count();
  if (static_cast<int>(target.size()) != n) throw ValidationError("label count mismatch");
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  for (int u = 0; u < n; ++u) {
    auto it = std::find(target.begin(), target.end(), labels_[static_cast<std::size_t>(u)]);
    if (it == target.end()) {
      throw ValidationError("label '" + labels_[static_cast<std::size_t>(u)] +
                            "' missing from target labels");
    }
    perm[static_cast<std::size_t>(u)] = static_cast<int>(it - target.begin());
  }
  std::vector<Merge> merges = merges_;
  for (Merge& m : merges) {
    if (m.left < n) m.left = perm[static_cast<std::size_t>(m.left)];
    if (m.right < n) m.right = perm[static_cast<std::size_t>(m.right)];
  }
  return from_merges(target, std::move(merges));
}

bool check_ultrametric(const Dendrogram& d) {
  const int n = d.leaf_count();
  if (n < 3) return true;
  const std::vector<double> dist = d.ultrametric_matrix();
  auto at = [&](int u, int v) { return dist[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)]; };
  auto triple_ok = [&](int u, int v, int x) {
    const double duv = at(u, v), dux = at(u, x), dvx = at(v, x);
    return duv <= std::max(dux, dvx) && dux <= std::max(duv, dvx) && dvx <= std::max(duv, dux);
  };
  if (n <= 60) {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        for (int x = v + 1; x < n; ++x)
          if (!triple_ok(u, v, x)) return false;
    return true;
  }
  std::mt19937 rng(0x7a3d);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int trial = 0; trial < 100000; ++trial) {
    int u = pick(rng), v = pick(rng), x = pick(rng);
    if (u == v || u == x || v == x) continue;
    if (!triple_ok(u, v, x)) return false;
  }
  return true;
}

namespace {

Partition blocks_from_kept_merges(const Dendrogram& d, const std::vector<char>& keep) {
  const int n = d.leaf_count();
  std::vector<int> dsu(static_cast<std::size_t>(d.node_count()));
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](int x) {
    while (dsu[static_cast<std::size_t>(x)] != x) {
      dsu[static_cast<std::size_t>(x)] = dsu[static_cast<std::size_t>(dsu[static_cast<std::size_t>(x)])];
      x = dsu[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int k = 0; k < n - 1; ++k) {
    if (!keep[static_cast<std::size_t>(k)]) continue;
    const Merge& m = d.merges()[static_cast<std::size_t>(k)];
    dsu[static_cast<std::size_t>(find(m.left))] = n + k;
    dsu[static_cast<std::size_t>(find(m.right))] = n + k;
  }
  std::vector<std::vector<int>> by_root(static_cast<std::size_t>(d.node_count()));
  for (int u = 0; u < n; ++u) by_root[static_cast<std::size_t>(find(u))].push_back(u);
  Partition p;
  for (auto& block : by_root) {
    if (!block.empty()) p.blocks.push_back(std::move(block));
  }
  // leaves were visited in id order, so each block is sorted and blocks come
  // out ordered by smallest member after this sort
  std::sort(p.blocks.begin(), p.blocks.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
  return p;
}

}  // namespace

Partition cut_k(const Dendrogram& d, int k) {
  const int n = d.leaf_count();
  if (k < 1 || k > n) {
    throw ValidationError("cluster count " + std::to_string(k) + " out of range [1, " +
                          std::to_string(n) + "]");
  }
  std::vector<int> order(static_cast<std::size_t>(n - 1));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ha = d.merges()[static_cast<std::size_t>(a)].height;
    const double hb = d.merges()[static_cast<std::size_t>(b)].height;
    if (ha != hb) return ha > hb;
    return a > b;  // ties: later merge removed first
  });
  std::vector<char> keep(static_cast<std::size_t>(n - 1), 1);
  for (int i = 0; i < k - 1; ++i) keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0;
  return blocks_from_kept_merges(d, keep);
}

Partition cut_height(const Dendrogram& d, double h) {
  const int n = d.leaf_count();
  std::vector<char> keep(static_cast<std::size_t>(n - 1), 0);
  std::vector<double> submax(static_cast<std::size_t>(d.node_count()), 0.0);
  for (int k = 0; k < n - 1; ++k) {
    const Merge& m = d.merges()[static_cast<std::size_t>(k)];
    submax[static_cast<std::size_t>(n + k)] =
        std::max({m.height, submax[static_cast<std::size_t>(m.left)], submax[static_cast<std::size_t>(m.right)]});
    keep[static_cast<std::size_t>(k)] = submax[static_cast<std::size_t>(n + k)] <= h;
  }
  return blocks_from_kept_merges(d, keep);
}

std::string to_json(const Dendrogram& d) {
  nlohmann::json j;
  j["n_leaves"] = d.leaf_count();
  j["labels"] = d.labels();
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : d.merges()) {
    merges.push_back(nlohmann::json::array({m.left, m.right, m.height}));
  }
  j["merges"] = std::move(merges);
  return j.dump();
}

Dendrogram dendrogram_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dendrogram JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n_leaves") || !j.contains("labels") || !j.contains("merges")) {
    throw ParseError("dendrogram JSON needs n_leaves, labels and merges");
  }
  std::vector<std::string> labels;
  std::vector<Merge> merges;
  try {
    labels = j.at("labels").get<std::vector<std::string>>();
    if (j.at("n_leaves").get<int>() != static_cast<int>(labels.size())) {
      throw ParseError("n_leaves does not match the label count");
    }
    for (const auto& row : j.at("merges")) {
      if (!row.is_array() || row.size() != 3) throw ParseError("merge rows are [left, right, height]");
      merges.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dendrogram JSON: ") + e.what());
  }
  Dendrogram d = Dendrogram::from_merges(std::move(labels), std::move(merges));
  if (!d.regular()) throw IrregularDendrogramError("dendrogram heights decrease toward the root");
  return d;
}

namespace {

std::string format_branch_length(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_newick(const Dendrogram& d, int node, std::string& out) {
  const int n = d.leaf_count();
  if (node < n) {
    const std::string& label = d.labels()[static_cast<std::size_t>(node)];
    if (label.find_first_of("(),:;'\" \t\n") != std::string::npos) {
      throw ValidationError("label '" + label + "' cannot be written as Newick");
    }
    out += label;
    return;
  }
  const Merge& m = d.merges()[static_cast<std::size_t>(node - n)];
  auto child_height = [&](int c) { return c < n ? 0.0 : d.height(c); };
  out += '(';
  write_newick(d, m.left, out);
  out += ':';
  out += format_branch_length(m.height - child_height(m.left));
  out += ',';
  write_newick(d, m.right, out);
  out += ':';
  out += format_branch_length(m.height - child_height(m.right));
  out += ')';
}

struct NewickParser {
  explicit NewickParser(const std::string& t) : text(t) {}

  const std::string& text;
  std::size_t pos = 0;

  struct Node {
    int left = -1, right = -1;    // indices into nodes; -1 for leaves
    int leaf = -1;                // leaf index when a leaf
    double height = 0.0;
  };
  std::vector<Node> nodes;
  std::vector<std::string> leaf_labels;

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  void expect(char c) {
    skip_space();
    if (peek() != c) {
      throw ParseError("Newick: expected '" + std::string(1, c) + "' at position " +
                       std::to_string(pos));
    }
    ++pos;
  }
  double parse_number() {
    skip_space();
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) throw ParseError("Newick: expected a branch length at position " + std::to_string(pos));
    pos += static_cast<std::size_t>(end - begin);
    return value;
  }

  int parse_node() {
    skip_space();
    if (peek() == '(') {
      ++pos;
      int left = parse_node();
      expect(':');
      double bl_left = parse_number();
      expect(',');
      int right = parse_node();
      expect(':');
      double bl_right = parse_number();
      skip_space();
      if (peek() == ',') throw ParseError("Newick: non-binary node at position " + std::to_string(pos));
      expect(')');
      double h_left = nodes[static_cast<std::size_t>(left)].height + bl_left;
      double h_right = nodes[static_cast<std::size_t>(right)].height + bl_right;
      if (std::abs(h_left - h_right) > 1e-9 * std::max({1.0, h_left, h_right})) {
        throw ParseError("Newick: branch lengths do not define an ultrametric");
      }
      Node node;
      node.left = left;
      node.right = right;
      node.height = std::max(h_left, h_right);
      nodes.push_back(node);
      return static_cast<int>(nodes.size()) - 1;
    }
    std::size_t start = pos;
    while (pos < text.size() && std::string("(),:;").find(text[pos]) == std::string::npos &&
           !std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    if (pos == start) throw ParseError("Newick: expected a leaf label at position " + std::to_string(pos));
    Node node;
    node.leaf = static_cast<int>(leaf_labels.size());
    leaf_labels.push_back(text.substr(start, pos - start));
    nodes.push_back(node);
    return static_cast<int>(nodes.size()) - 1;
  }
};

}  // namespace

std::string to_newick(const Dendrogram& d) {
  std::string out;
  if (d.leaf_count() == 1) {
    out = d.labels()[0];
  } else {
    write_newick(d, d.root(), out);
  }
  out += ';';
  return out;
}

Dendrogram dendrogram_from_newick(const std::string& text) {
  NewickParser parser(text);
  int root = parser.parse_node();
  parser.skip_space();
  if (parser.peek() == ':') {
    ++parser.pos;
    parser.parse_number();
  }
  parser.expect(';');
  parser.skip_space();
  if (parser.pos != text.size()) throw ParseError("Newick: trailing characters");

  const int n = static_cast<int>(parser.leaf_labels.size());
  if (n == 1) return Dendrogram::from_merges(parser.leaf_labels, {});
  (void)root;
  // internal nodes in post-order (children first), then stably by height
  std::vector<int> internal;
  for (int i = 0; i < static_cast<int>(parser.nodes.size()); ++i) {
    if (parser.nodes[static_cast<std::size_t>(i)].leaf == -1) internal.push_back(i);
  }
  std::stable_sort(internal.begin(), internal.end(), [&](int a, int b) {
    return parser.nodes[static_cast<std::size_t>(a)].height < parser.nodes[static_cast<std::size_t>(b)].height;
  });
  std::vector<int> id_of(parser.nodes.size(), -1);
  for (int i = 0; i < static_cast<int>(parser.nodes.size()); ++i) {
    int leaf = parser.nodes[static_cast<std::size_t>(i)].leaf;
    if (leaf != -1) id_of[static_cast<std::size_t>(i)] = leaf;
  }
  std::vector<Merge> merges;
  for (std::size_t k = 0; k < internal.size(); ++k) {
    const auto& node = parser.nodes[static_cast<std::size_t>(internal[k])];
    int left = id_of[static_cast<std::size_t>(node.left)];
    int right = id_of[static_cast<std::size_t>(node.right)];
    if (left == -1 || right == -1) {
      throw IrregularDendrogramError("Newick heights decrease toward the root");
    }
    merges.push_back({left, right, node.height});
    id_of[static_cast<std::size_t>(internal[k])] = n + static_cast<int>(k);
  }
  Dendrogram d = Dendrogram::from_merges(parser.leaf_labels, std::move(merges));
  if (!d.regular()) throw IrregularDendrogramError("Newick heights decrease toward the root");
  return d;
}

}  // namespace dendrograph
