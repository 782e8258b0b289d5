#include "dendrograph/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dendrograph {

namespace {

// Linkage comparisons use a strict total order: larger sigma first, exact
// ties broken by the lexicographically smaller sorted (min leaf, min leaf)
// pair. The key never changes when other clusters merge, and a merged
// pair's key equals one of its parents' keys, so the refined order stays
// reducible; that makes the nearest-neighbor chain build exactly the naive
// tree even when linkage ties are present.
struct PairRank {
  double sigma;
  int lo, hi;

  PairRank(double s, int leaf_a, int leaf_b)
      : sigma(s), lo(std::min(leaf_a, leaf_b)), hi(std::max(leaf_a, leaf_b)) {}

  bool preferred_over(const PairRank& other) const {
    if (sigma != other.sigma) return sigma > other.sigma;
    if (lo != other.lo) return lo < other.lo;
    return hi < other.hi;
  }
};

}  // namespace

double linkage_similarity(double cross_mass, double pi_a, double pi_b) {
  return cross_mass / (2.0 * pi_a * pi_b);
}

double merge_update(double sigma_ac, double sigma_bc, double pi_a, double pi_b) {
  const double pi_ab = pi_a + pi_b;
  return (pi_a / pi_ab) * sigma_ac + (pi_b / pi_ab) * sigma_bc;
}

ClusterState::ClusterState(const WeightedGraph& g, const NodePrior& prior)
    : graph_(&g), n_(g.node_count()), next_id_(g.node_count()) {
  if (prior.size() != n_) throw ValidationError("prior size does not match the graph");
  const std::size_t n = static_cast<std::size_t>(n_);
  active_.resize(n);
  std::iota(active_.begin(), active_.end(), 0);
  slot_of_id_.assign(2 * n - 1, -1);
  id_of_slot_.resize(n);
  std::iota(id_of_slot_.begin(), id_of_slot_.end(), 0);
  for (int u = 0; u < n_; ++u) slot_of_id_[static_cast<std::size_t>(u)] = u;
  pi_.resize(n);
  pi_comp_.assign(n, 0.0);
  min_leaf_.resize(n);
  members_.resize(n);
  for (int u = 0; u < n_; ++u) {
    pi_[static_cast<std::size_t>(u)] = prior[u];
    min_leaf_[static_cast<std::size_t>(u)] = u;
    members_[static_cast<std::size_t>(u)] = {u};
  }
  mass_.assign(n * n, 0.0);
  const double w = g.total_weight();
  for (const Edge& e : g.edges()) {
    const double p = 2.0 * e.weight / w;
    mass_[static_cast<std::size_t>(e.u) * n + static_cast<std::size_t>(e.v)] = p;
    mass_[static_cast<std::size_t>(e.v) * n + static_cast<std::size_t>(e.u)] = p;
  }
}

int ClusterState::slot(int cluster_id) const {
  if (cluster_id < 0 || cluster_id >= static_cast<int>(slot_of_id_.size()) ||
      slot_of_id_[static_cast<std::size_t>(cluster_id)] < 0) {
    throw ValidationError("cluster id " + std::to_string(cluster_id) + " is not active");
  }
  return slot_of_id_[static_cast<std::size_t>(cluster_id)];
}

double ClusterState::pi(int cluster_id) const {
  const int s = slot(cluster_id);
  return pi_[static_cast<std::size_t>(s)] + pi_comp_[static_cast<std::size_t>(s)];
}

double ClusterState::cross_mass(int id_a, int id_b) const {
  return mass_[static_cast<std::size_t>(slot(id_a)) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(slot(id_b))];
}

double ClusterState::sigma(int id_a, int id_b) const {
  return linkage_similarity(cross_mass(id_a, id_b), pi(id_a), pi(id_b));
}

double ClusterState::merge_height(int id_a, int id_b) const {
  return 2.0 * pi(id_a) * pi(id_b) / cross_mass(id_a, id_b);
}

const std::vector<int>& ClusterState::members(int cluster_id) const {
  return members_[static_cast<std::size_t>(slot(cluster_id))];
}

int ClusterState::min_leaf(int cluster_id) const {
  return min_leaf_[static_cast<std::size_t>(slot(cluster_id))];
}

int ClusterState::merge(int id_a, int id_b) {
  if (id_a == id_b) throw ValidationError("cannot merge a cluster with itself");
  const std::size_t n = static_cast<std::size_t>(n_);
  const int sa = slot(id_a);
  const int sb = slot(id_b);

  // masses are additive: p(AuB, C) = p(A,C) + p(B,C); the new cluster keeps
  // slot sa, slot sb is retired
  for (int other : active_) {
    const std::size_t sc = static_cast<std::size_t>(slot(other));
    if (static_cast<int>(sc) == sa || static_cast<int>(sc) == sb) continue;
    const double sum = mass_[static_cast<std::size_t>(sa) * n + sc] + mass_[static_cast<std::size_t>(sb) * n + sc];
    mass_[static_cast<std::size_t>(sa) * n + sc] = sum;
    mass_[sc * n + static_cast<std::size_t>(sa)] = sum;
  }
  mass_[static_cast<std::size_t>(sa) * n + static_cast<std::size_t>(sa)] = 0.0;

  // Neumaier-compensated pi(A) + pi(B)
  const double a = pi_[static_cast<std::size_t>(sa)];
  const double b = pi_[static_cast<std::size_t>(sb)];
  const double sum = a + b;
  const double carry = std::abs(a) >= std::abs(b) ? (a - sum) + b : (b - sum) + a;
  pi_[static_cast<std::size_t>(sa)] = sum;
  pi_comp_[static_cast<std::size_t>(sa)] += pi_comp_[static_cast<std::size_t>(sb)] + carry;

  min_leaf_[static_cast<std::size_t>(sa)] =
      std::min(min_leaf_[static_cast<std::size_t>(sa)], min_leaf_[static_cast<std::size_t>(sb)]);
  auto& members = members_[static_cast<std::size_t>(sa)];
  auto& absorbed = members_[static_cast<std::size_t>(sb)];
  members.insert(members.end(), absorbed.begin(), absorbed.end());
  absorbed.clear();
  absorbed.shrink_to_fit();

  const int new_id = next_id_++;
  slot_of_id_[static_cast<std::size_t>(id_a)] = -1;
  slot_of_id_[static_cast<std::size_t>(id_b)] = -1;
  slot_of_id_[static_cast<std::size_t>(new_id)] = sa;
  id_of_slot_[static_cast<std::size_t>(sa)] = new_id;

  auto remove = [&](int id) {
    active_.erase(std::find(active_.begin(), active_.end(), id));
  };
  remove(id_a);
  remove(id_b);
  active_.push_back(new_id);  // ids grow, so the list stays ascending
  return new_id;
}

namespace {

struct PendingAudit {
  int id_a, id_b;
  double pi_a, pi_b;
  std::vector<int> other_ids;
  std::vector<double> sigma_a, sigma_b;
};

void observe_step(const ClusterState& state, int id_a, int id_b, double sig, double height,
                  AgglomerationAudit* audit) {
  if (audit == nullptr || !audit->on_step) return;
  std::vector<std::vector<int>> partition;
  std::size_t block_a = 0, block_b = 0;
  partition.reserve(state.active_ids().size());
  for (int id : state.active_ids()) {
    if (id == id_a) block_a = partition.size();
    if (id == id_b) block_b = partition.size();
    std::vector<int> block = state.members(id);
    std::sort(block.begin(), block.end());
    partition.push_back(std::move(block));
  }
  MergeStep step{partition, block_a, block_b, sig, height};
  audit->on_step(step);
}

PendingAudit capture_pre_merge(const ClusterState& state, int id_a, int id_b) {
  PendingAudit pending;
  pending.id_a = id_a;
  pending.id_b = id_b;
  pending.pi_a = state.pi(id_a);
  pending.pi_b = state.pi(id_b);
  for (int other : state.active_ids()) {
    if (other == id_a || other == id_b) continue;
    pending.other_ids.push_back(other);
    pending.sigma_a.push_back(state.sigma(id_a, other));
    pending.sigma_b.push_back(state.sigma(id_b, other));
  }
  return pending;
}

void check_post_merge(const ClusterState& state, int new_id, const PendingAudit& pending,
                      AgglomerationAudit& audit) {
  const std::vector<int>& new_members = state.members(new_id);
  for (std::size_t i = 0; i < pending.other_ids.size(); ++i) {
    const int other = pending.other_ids[i];
    const double cached = state.cross_mass(new_id, other);
    const double direct = state.graph().cluster_cross_mass(new_members, state.members(other));
    const double scale = std::max({std::abs(cached), std::abs(direct), 1e-300});
    audit.max_mass_rel_err = std::max(audit.max_mass_rel_err, std::abs(cached - direct) / scale);

    const double sigma_cached = state.sigma(new_id, other);
    const double sigma_update =
        merge_update(pending.sigma_a[i], pending.sigma_b[i], pending.pi_a, pending.pi_b);
    const double sscale = std::max({std::abs(sigma_cached), std::abs(sigma_update), 1e-300});
    audit.max_update_rel_err =
        std::max(audit.max_update_rel_err, std::abs(sigma_cached - sigma_update) / sscale);

    const double bound = std::max(pending.sigma_a[i], pending.sigma_b[i]);
    audit.max_reducibility_excess = std::max(audit.max_reducibility_excess, sigma_cached - bound);
  }
}

Merge make_merge(const ClusterState& state, int id_a, int id_b, double height) {
  // left child is the one holding the smallest leaf
  if (state.min_leaf(id_a) <= state.min_leaf(id_b)) return {id_a, id_b, height};
  return {id_b, id_a, height};
}

}  // namespace

Dendrogram agglomerate_naive(const WeightedGraph& g, const NodePrior& prior,
                             AgglomerationAudit* audit) {
  const int n = g.node_count();
  ClusterState state(g, prior);
  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(n - 1));
  double floor_height = 0.0;

  for (int step = 0; step < n - 1; ++step) {
    const std::vector<int>& active = state.active_ids();
    int best_a = -1, best_b = -1;
    PairRank best(-1.0, 0, 0);
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const PairRank rank(state.sigma(active[i], active[j]), state.min_leaf(active[i]),
                            state.min_leaf(active[j]));
        if (best_a < 0 || rank.preferred_over(best)) {
          best_a = active[i];
          best_b = active[j];
          best = rank;
        }
      }
    }
    const double best_sigma = best.sigma;
    double height = state.merge_height(best_a, best_b);
    height = std::max(height, floor_height);  // absorbs ulp inversions under ties
    floor_height = height;

    observe_step(state, best_a, best_b, best_sigma, height, audit);
    Merge merge = make_merge(state, best_a, best_b, height);
    if (audit != nullptr) {
      PendingAudit pending = capture_pre_merge(state, best_a, best_b);
      const int new_id = state.merge(best_a, best_b);
      check_post_merge(state, new_id, pending, *audit);
    } else {
      state.merge(best_a, best_b);
    }
    merges.push_back(merge);
  }
  return Dendrogram::from_merges(g.labels(), std::move(merges));
}

Dendrogram agglomerate_nn_chain(const WeightedGraph& g, const NodePrior& prior,
                                AgglomerationAudit* audit) {
  const int n = g.node_count();
  ClusterState state(g, prior);

  struct RawMerge {
    int rep_a, rep_b;  // min leaves of the two clusters at merge time
    double height;
  };
  std::vector<RawMerge> raw;
  raw.reserve(static_cast<std::size_t>(n - 1));
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));

  while (static_cast<int>(raw.size()) < n - 1) {
    if (chain.empty()) chain.push_back(state.active_ids().front());
    const int tip = chain.back();
    const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;

    // nearest neighbor of the tip under the refined total order; mutual
    // nearest neighbors are merged
    int best = -1;
    PairRank best_rank(-1.0, 0, 0);
    for (int other : state.active_ids()) {
      if (other == tip) continue;
      const PairRank rank(state.sigma(tip, other), state.min_leaf(tip), state.min_leaf(other));
      if (best < 0 || rank.preferred_over(best_rank)) {
        best = other;
        best_rank = rank;
      }
    }

    if (best == prev) {
      const double height = state.merge_height(tip, prev);
      observe_step(state, prev, tip, best_rank.sigma, height, audit);
      raw.push_back({state.min_leaf(tip), state.min_leaf(prev), height});
      if (audit != nullptr) {
        PendingAudit pending = capture_pre_merge(state, tip, prev);
        const int new_id = state.merge(tip, prev);
        check_post_merge(state, new_id, pending, *audit);
      } else {
        state.merge(tip, prev);
      }
      chain.pop_back();
      chain.pop_back();
    } else {
      chain.push_back(best);
    }
  }

  // merges happen in chain order; sort by height (stable: chain order always
  // creates children before their parent) and relabel to dendrogram ids
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& a, const RawMerge& b) { return a.height < b.height; });

  std::vector<int> dsu(static_cast<std::size_t>(n));
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](int x) {
    while (dsu[static_cast<std::size_t>(x)] != x) {
      dsu[static_cast<std::size_t>(x)] = dsu[static_cast<std::size_t>(dsu[static_cast<std::size_t>(x)])];
      x = dsu[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<int> dend_id(static_cast<std::size_t>(n));
  std::iota(dend_id.begin(), dend_id.end(), 0);
  std::vector<int> min_leaf(static_cast<std::size_t>(n));
  std::iota(min_leaf.begin(), min_leaf.end(), 0);

  std::vector<Merge> merges;
  merges.reserve(raw.size());
  double floor_height = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const int ra = find(raw[k].rep_a);
    const int rb = find(raw[k].rep_b);
    const int ida = dend_id[static_cast<std::size_t>(ra)];
    const int idb = dend_id[static_cast<std::size_t>(rb)];
    double height = std::max(raw[k].height, floor_height);
    floor_height = height;
    if (min_leaf[static_cast<std::size_t>(ra)] <= min_leaf[static_cast<std::size_t>(rb)]) {
      merges.push_back({ida, idb, height});
    } else {
      merges.push_back({idb, ida, height});
    }
    dsu[static_cast<std::size_t>(rb)] = ra;
    min_leaf[static_cast<std::size_t>(ra)] =
        std::min(min_leaf[static_cast<std::size_t>(ra)], min_leaf[static_cast<std::size_t>(rb)]);
    dend_id[static_cast<std::size_t>(ra)] = n + static_cast<int>(k);
  }
  return Dendrogram::from_merges(g.labels(), std::move(merges));
}

}  // namespace dendrograph
