// Timing comparison of the OpenMP kernels against their serial references,
// and of the naive agglomeration against the nearest-neighbor chain.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "dendrograph/clustering.hpp"
#include "dendrograph/graph.hpp"
#include "dendrograph/metrics.hpp"
#include "dendrograph/oracle.hpp"
#include "dendrograph/reconstruction.hpp"

namespace {

using namespace dendrograph;

WeightedGraph random_graph(int n, int extra_edges, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1 + extra_edges));
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    edges.push_back({pick(rng), v, weight(rng)});
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  for (int i = 0; i < extra_edges; ++i) {
    int u = node(rng), v = node(rng);
    if (u == v) continue;
    edges.push_back({std::min(u, v), std::max(u, v), weight(rng)});
  }
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) labels[static_cast<std::size_t>(u)] = "n" + std::to_string(u);
  return WeightedGraph::from_edges(std::move(labels), edges);
}

template <typename Fn>
double time_min(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto start = std::chrono::steady_clock::now();
    fn();
    auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

volatile double sink;

void report(const char* name, double serial, double fast, const char* fast_name) {
  std::printf("%-34s %10.3f ms   %-10s %10.3f ms   speedup %.2fx\n", name, serial * 1e3,
              fast_name, fast * 1e3, serial / fast);
}

}  // namespace

int main() {
  const int n = 1500;
  const WeightedGraph g = random_graph(n, 5 * n, 1);
  const NodePrior prior = NodePrior::degree(g);
  const Dendrogram d = agglomerate_nn_chain(g, prior);

  {
    double serial = time_min(5, [&] { sink = d.ultrametric_matrix(false)[1]; });
    double parallel = time_min(5, [&] { sink = d.ultrametric_matrix(true)[1]; });
    report("ultrametric matrix (n=1500)", serial, parallel, "openmp");
  }
  {
    const std::vector<double> dist = d.ultrametric_matrix();
    const double* pi = prior.values().data();
    double serial = time_min(5, [&] {
      sink = kernels::prior_over_distance_sum_serial(dist.data(), pi, n);
    });
    double parallel = time_min(5, [&] {
      sink = kernels::prior_over_distance_sum_parallel(dist.data(), pi, n);
    });
    report("prior/distance pair sum (n=1500)", serial, parallel, "openmp");
  }
  {
    double serial = time_min(5, [&] { sink = reconstruct(d, prior, false).total_weight(); });
    double parallel = time_min(5, [&] { sink = reconstruct(d, prior, true).total_weight(); });
    report("reconstruction table (n=1500)", serial, parallel, "openmp");
  }
  {
    const WeightedGraph small = random_graph(8, 20, 2);
    const NodePrior small_prior = NodePrior::degree(small);
    double serial = time_min(3, [&] {
      sink = exhaustive_optimum(small, small_prior, OracleObjective::tree_objective, false).score;
    });
    double parallel = time_min(3, [&] {
      sink = exhaustive_optimum(small, small_prior, OracleObjective::tree_objective, true).score;
    });
    report("oracle shape search (n=8)", serial, parallel, "openmp");
  }
  for (int size : {400, 800}) {
    const WeightedGraph gs = random_graph(size, 5 * size, 3);
    const NodePrior ps = NodePrior::degree(gs);
    double naive = time_min(3, [&] { sink = agglomerate_naive(gs, ps).merges().back().height; });
    double chain = time_min(3, [&] { sink = agglomerate_nn_chain(gs, ps).merges().back().height; });
    char name[64];
    std::snprintf(name, sizeof(name), "agglomeration naive (n=%d)", size);
    report(name, naive, chain, "nn-chain");
  }
  return 0;
}
