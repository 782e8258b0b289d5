#include "dendrograph/reconstruction.hpp"

#include <algorithm>
#include <cmath>

#include "dendrograph/numformat.hpp"

namespace dendrograph {

namespace {

std::size_t upper_index(int n, int u, int v) {
  // condensed index of pair (u,v), u < v
  const std::size_t nu = static_cast<std::size_t>(u);
  return nu * static_cast<std::size_t>(n) - nu * (nu + 1) / 2 + static_cast<std::size_t>(v - u - 1);
}

}  // namespace

double ReconstructedGraph::weight(int u, int v) const {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw ValidationError("node id out of range");
  if (u == v) throw ValidationError("reconstructed weight of a node with itself");
  if (u > v) std::swap(u, v);
  return upper_[upper_index(n_, u, v)];
}

ReconstructedGraph reconstruct(const Dendrogram& d, const NodePrior& prior, bool parallel) {
  const int n = d.leaf_count();
  if (prior.size() != n) throw ValidationError("prior size does not match the dendrogram");
  ReconstructedGraph r;
  r.n_ = n;
  r.labels_ = d.labels();
  r.upper_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2, 0.0);
  if (n < 2) {
    r.total_ = 0.0;
    return r;
  }

  const std::vector<double> dist = d.ultrametric_matrix(parallel);
  double* out = r.upper_.data();
  const double* pi = prior.values().data();
#pragma omp parallel for schedule(static) if (parallel)
  for (int u = 0; u < n - 1; ++u) {
    const double* row = dist.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(n);
    double* dest = out + upper_index(n, u, u + 1);
    for (int v = u + 1; v < n; ++v) dest[v - u - 1] = pi[u] * pi[v] / row[v];
  }

  // fixed, label-independent summation order for the total
  std::vector<double> sorted = r.upper_;
  std::sort(sorted.begin(), sorted.end());
  double half_total = 0.0;
  for (double x : sorted) half_total += x;
  r.total_ = 2.0 * half_total;
  return r;
}

std::string export_reconstruction(const ReconstructedGraph& r, double threshold) {
  if (threshold < 0.0) throw ValidationError("threshold must be non-negative");
  std::string out;
  const int n = r.node_count();
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double w = r.weight(u, v);
      if (w < threshold) continue;
      out += r.labels()[static_cast<std::size_t>(u)];
      out += ' ';
      out += r.labels()[static_cast<std::size_t>(v)];
      out += ' ';
      out += format_significant(w);
      out += '\n';
    }
  }
  return out;
}

}  // namespace dendrograph
