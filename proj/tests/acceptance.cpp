// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Shared random-suite data (criteria 2-5, 9, 10) is computed once.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dendrograph/clustering.hpp"
#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"
#include "dendrograph/metrics.hpp"
#include "dendrograph/oracle.hpp"
#include "dendrograph/reconstruction.hpp"
#include "testutil.hpp"

namespace {

using namespace dendrograph;

int failures = 0;

void report(int number, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", number, name,
              detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// shared suite: 200 random connected graphs, n in [4,40], both priors,
// greedy trees plus 10 random positive-mass shapes each

struct SuiteData {
  double max_identity_gap = 0.0;   // |cost_J(optimal) + tree_objective|
  double max_recon_gap = 0.0;      // |KL - (I - tree_objective)|
  double max_scale_gap = 0.0;      // |J(alpha d) - J(d)|
  double max_mass_err = 0.0;       // cached linkage vs recomputation
  double max_update_err = 0.0;     // Proposition-style convex combination
  double max_reduc_excess = 0.0;   // reducibility violation
  bool regular = true;             // non-decreasing greedy heights
  bool ultrametric = true;         // exhaustive triple check
  bool coherent = true;            // merged pair == max_resolution argmax
  double max_sigma_gap = 0.0;
  double max_fd = 0.0;             // stationarity finite differences
  int graphs = 0;
  int dendrograms = 0;
};

double central_fd_max(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& opt) {
  double worst = 0.0;
  std::vector<double> heights;
  for (const Merge& m : opt.merges()) heights.push_back(m.height);
  for (std::size_t k = 0; k < heights.size(); ++k) {
    const double h = heights[k];
    const double step = 1e-5 * h;
    std::vector<double> up = heights, down = heights;
    up[k] = h + step;
    down[k] = h - step;
    const double fd =
        (cost_j(g, prior, opt.with_heights(up)) - cost_j(g, prior, opt.with_heights(down))) /
        (2.0 * step);
    worst = std::max(worst, std::abs(fd));
  }
  return worst;
}

void check_dendrogram(const WeightedGraph& g, const NodePrior& prior, const Dendrogram& shape,
                      SuiteData& data) {
  const Dendrogram opt = optimal_heights(g, prior, shape);
  const double objective = tree_objective(g, prior, shape);
  const double j = cost_j(g, prior, opt);
  data.max_identity_gap = std::max(data.max_identity_gap, std::abs(j + objective));
  const double kl = kl_reconstruction(g, prior, opt);
  const double divergence = graph_prior_divergence(g, prior);
  data.max_recon_gap = std::max(data.max_recon_gap, std::abs(kl - (divergence - objective)));
  for (double alpha : {0.5, 2.0, 10.0}) {
    data.max_scale_gap = std::max(data.max_scale_gap, std::abs(cost_j(g, prior, opt.scaled(alpha)) - j));
  }
  data.max_fd = std::max(data.max_fd, central_fd_max(g, prior, opt));
  ++data.dendrograms;
}

SuiteData run_shared_suite() {
  SuiteData data;
  for (unsigned seed = 1; seed <= 200; ++seed) {
    const int n = 4 + static_cast<int>((seed * 13) % 37);
    const WeightedGraph g = testutil::random_connected_graph(n, n, seed);
    ++data.graphs;
    for (PriorKind kind : {PriorKind::degree, PriorKind::uniform}) {
      const NodePrior prior = build_prior(g, kind);

      AgglomerationAudit audit;
      audit.on_step = [&](const MergeStep& step) {
        if (step.partition.size() < 2) return;
        const MaxResolution r = max_resolution(g, prior, Partition{step.partition});
        if (std::minmax(r.block_a, r.block_b) != std::minmax(step.block_a, step.block_b)) {
          data.coherent = false;
        }
        data.max_sigma_gap = std::max(data.max_sigma_gap, std::abs(r.value - step.sigma));
      };
      const Dendrogram greedy = agglomerate_naive(g, prior, &audit);
      data.max_mass_err = std::max(data.max_mass_err, audit.max_mass_rel_err);
      data.max_update_err = std::max(data.max_update_err, audit.max_update_rel_err);
      data.max_reduc_excess = std::max(data.max_reduc_excess, audit.max_reducibility_excess);

      double prev = 0.0;
      for (const Merge& m : greedy.merges()) {
        if (m.height < prev) data.regular = false;
        prev = m.height;
      }
      if (!greedy.regular() || !check_ultrametric(greedy)) data.ultrametric = false;

      check_dendrogram(g, prior, greedy, data);
      for (unsigned shape_seed = 0; shape_seed < 10; ++shape_seed) {
        check_dendrogram(g, prior,
                         testutil::random_positive_mass_shape(g, seed * 1000 + shape_seed), data);
      }
    }
  }
  return data;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const WeightedGraph g = testutil::path3();
  const Dendrogram degree = agglomerate_naive(g, NodePrior::degree(g));
  const bool exact = degree.merges()[0] == Merge{0, 1, 0.5} && degree.merges()[1] == Merge{3, 2, 0.75};
  const Dendrogram uniform = agglomerate_naive(g, NodePrior::uniform(3));
  const double gap = std::max(std::abs(uniform.merges()[0].height - 4.0 / 9),
                              std::abs(uniform.merges()[1].height - 8.0 / 9));
  report(1, "path end-to-end heights", exact && gap <= 1e-12,
         "degree exact: " + std::string(exact ? "yes" : "no") + ", uniform gap " + fmt(gap));
}

void criterion_6() {
  bool identical = true;
  for (unsigned seed = 1; seed <= 100; ++seed) {
    const int n = 5 + static_cast<int>((seed * 7) % 56);
    const WeightedGraph g = testutil::random_connected_graph(n, 2 * n, seed + 500, 1e-6);
    for (PriorKind kind : {PriorKind::degree, PriorKind::uniform}) {
      const NodePrior prior = build_prior(g, kind);
      const Dendrogram naive = agglomerate_naive(g, prior);
      const Dendrogram chain = agglomerate_nn_chain(g, prior);
      for (std::size_t k = 0; k < naive.merges().size(); ++k) {
        const Merge& a = naive.merges()[k];
        const Merge& b = chain.merges()[k];
        if (a.left != b.left || a.right != b.right ||
            std::abs(a.height - b.height) > 1e-12 * std::max(a.height, b.height)) {
          identical = false;
        }
      }
    }
  }
  double max_cost_gap = 0.0;
  for (unsigned seed = 1; seed <= 25; ++seed) {
    const int n = 6 + static_cast<int>((seed * 5) % 40);
    const WeightedGraph g = testutil::random_unit_graph(n, n, seed);
    const NodePrior prior = NodePrior::degree(g);
    max_cost_gap = std::max(max_cost_gap,
                            std::abs(cost_j(g, prior, agglomerate_naive(g, prior)) -
                                     cost_j(g, prior, agglomerate_nn_chain(g, prior))));
  }
  report(6, "nn-chain equals naive", identical && max_cost_gap <= 1e-9,
         std::string("jittered merge lists identical: ") + (identical ? "yes" : "no") +
             ", tied-cost gap " + fmt(max_cost_gap));
}

// independent brute force for the path instance: raw arithmetic only
double brute_force_path_objective(bool optimum) {
  const double w[3][3] = {{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};
  const double total = 4.0;
  const double pi[3] = {0.25, 0.5, 0.25};
  double best = -1e300;
  double greedy_shape_score = 0.0;
  const int shapes[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};  // (a,b) merged first, c outside
  for (const auto& s : shapes) {
    const int a = s[0], b = s[1], c = s[2];
    double score = 0.0;
    const double p1 = 2.0 * w[a][b] / total;
    if (p1 > 0) score += p1 * std::log(p1 / (2.0 * pi[a] * pi[b]));
    const double p2 = 2.0 * (w[a][c] + w[b][c]) / total;
    if (p2 > 0) score += p2 * std::log(p2 / (2.0 * (pi[a] + pi[b]) * pi[c]));
    best = std::max(best, score);
    if (a == 0 && b == 1) greedy_shape_score = score;  // the greedy merge order
  }
  return optimum ? best : greedy_shape_score;
}

void criterion_7() {
  const double brute_optimum = brute_force_path_objective(true);
  const double brute_greedy = brute_force_path_objective(false);
  const WeightedGraph p3 = testutil::path3();
  const NodePrior prior = NodePrior::degree(p3);
  const OracleResult oracle = exhaustive_optimum(p3, prior, OracleObjective::tree_objective);
  const double greedy = tree_objective(p3, prior, agglomerate_naive(p3, prior));

  bool ok = std::abs(brute_optimum - std::log(2.0)) <= 1e-9 &&
            std::abs(brute_greedy - 0.5 * std::log(8.0 / 3.0)) <= 1e-9 &&
            std::abs(oracle.score - std::log(2.0)) <= 1e-9 &&
            std::abs(greedy - 0.5 * std::log(8.0 / 3.0)) <= 1e-9 &&
            shape_to_nested_json(oracle.shape) == "[[0,2],1]";

  double worst_excess = 0.0;
  for (unsigned seed = 1; seed <= 50; ++seed) {
    const int n = 4 + static_cast<int>(seed % 3);
    const WeightedGraph g = testutil::random_connected_graph(n, 2 * n, seed + 900);
    const NodePrior p = seed % 2 ? NodePrior::degree(g) : NodePrior::uniform(n);
    const double greedy_score = tree_objective(g, p, agglomerate_nn_chain(g, p));
    const double optimum = exhaustive_optimum(g, p, OracleObjective::tree_objective).score;
    worst_excess = std::max(worst_excess, greedy_score - optimum);
  }
  ok = ok && worst_excess <= 1e-12;

  bool counts_ok = true;
  for (int n = 2; n <= 7; ++n) {
    std::uint64_t counted = 0;
    for_each_tree_shape(n, [&](const TreeShape&, std::uint64_t) { ++counted; });
    if (counted != tree_shape_count(n)) counts_ok = false;
  }
  ok = ok && counts_ok;
  report(7, "oracle gap and enumeration", ok,
         "path optimum " + fmt(oracle.score) + " vs greedy " + fmt(greedy) + ", max excess " +
             fmt(worst_excess) + ", counts " + (counts_ok ? "ok" : "wrong"));
}

void criterion_8() {
  double worst = 0.0;
  for (int n : {3, 4, 5}) {
    const WeightedGraph g = testutil::complete(n);
    const NodePrior prior = NodePrior::degree(g);
    worst = std::max(worst, std::abs(kl_reconstruction(g, prior, agglomerate_naive(g, prior))));
    worst = std::max(worst, std::abs(kl_reconstruction(g, prior, agglomerate_nn_chain(g, prior))));
  }
  report(8, "perfect reconstruction of complete graphs", worst <= 1e-10, "max KL " + fmt(worst));
}

void criterion_9(const SuiteData& data) {
  const WeightedGraph p3 = testutil::path3();
  const double q = modularity(p3, NodePrior::degree(p3), Partition{{{0, 1}, {2}}}, 1.0);
  const bool exact = q == -0.125;
  report(9, "greedy merges maximize resolution", data.coherent && exact,
         std::string("argmax coherent: ") + (data.coherent ? "yes" : "no") + ", sigma gap " +
             fmt(data.max_sigma_gap) + ", path modularity " + fmt(q));
}

void criterion_11() {
  struct Sample {
    int n;
    double seconds;
  };
  std::vector<Sample> samples;
  for (int n : {500, 1000, 2000}) {
    const WeightedGraph g = testutil::random_connected_graph(n, 4 * n, 77u + static_cast<unsigned>(n));
    const NodePrior prior = NodePrior::degree(g);
    agglomerate_nn_chain(g, prior);  // warm up
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const Dendrogram d = agglomerate_nn_chain(g, prior);
      const auto stop = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(stop - start).count());
      if (rep == 0 && !d.regular()) {
        report(11, "nn-chain performance", false, "irregular output at n=" + std::to_string(n));
        return;
      }
    }
    samples.push_back({n, best});
  }
  const double r1 = samples[1].seconds / samples[0].seconds;
  const double r2 = samples[2].seconds / samples[1].seconds;
  const bool pass = samples[2].seconds < 10.0 && r1 >= 3.0 && r1 <= 6.0 && r2 >= 3.0 && r2 <= 6.0;
  report(11, "nn-chain performance and quadratic scaling", pass,
         "t(500)=" + fmt(samples[0].seconds) + "s, t(1000)=" + fmt(samples[1].seconds) +
             "s, t(2000)=" + fmt(samples[2].seconds) + "s, doubling ratios " + fmt(r1) + ", " +
             fmt(r2));
}

}  // namespace

int main() {
  const auto suite_start = std::chrono::steady_clock::now();

  criterion_1();
  const SuiteData data = run_shared_suite();
  report(2, "optimality and reconstruction identities",
         data.max_identity_gap <= 1e-9 && data.max_recon_gap <= 1e-9,
         std::to_string(data.graphs) + " graphs / " + std::to_string(data.dendrograms) +
             " dendrograms, identity gap " + fmt(data.max_identity_gap) + ", reconstruction gap " +
             fmt(data.max_recon_gap));
  report(3, "scale invariance of cost J", data.max_scale_gap <= 1e-10,
         "max |J(alpha d) - J(d)| " + fmt(data.max_scale_gap));
  report(4, "linkage caches, update formula, reducibility",
         data.max_mass_err <= 1e-9 && data.max_update_err <= 1e-9 && data.max_reduc_excess <= 1e-12,
         "mass err " + fmt(data.max_mass_err) + ", update err " + fmt(data.max_update_err) +
             ", reducibility excess " + fmt(data.max_reduc_excess));
  report(5, "regular ultrametric dendrograms", data.regular && data.ultrametric,
         std::string("heights non-decreasing: ") + (data.regular ? "yes" : "no") +
             ", triple check: " + (data.ultrametric ? "yes" : "no"));
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9(data);
  report(10, "stationarity at optimal heights", data.max_fd <= 1e-6,
         "max |dJ/dh| " + fmt(data.max_fd));
  criterion_11();

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%d criteria failed; suite time %.1fs\n", failures, elapsed);
  return failures == 0 ? 0 : 1;
}
