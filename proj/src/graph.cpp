#include "nprox/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace nprox {

SparseSymmetricMatrix ppmi_transform(const SparseSymmetricMatrix& counts) {
  const double total = counts.total_weight();
  if (!(total > 0.0)) throw std::invalid_argument("ppmi_transform: all-zero matrix");

  const auto n = counts.dimension();
  std::vector<double> marginal(n);
  for (NodeId i = 0; i < n; ++i) marginal[i] = counts.weighted_degree(i) / total;

  std::vector<Triplet> out;
  counts.for_each_edge([&](NodeId i, NodeId j, double w) {
    const double pmi = std::log2((w / total) / (marginal[i] * marginal[j]));
    if (pmi > 1e-12) out.push_back({i, j, pmi});
  });
  return SparseSymmetricMatrix::from_triplets(n, out);
}

std::size_t select_degree_threshold(const SparseSymmetricMatrix& g,
                                    double max_removal_fraction) {
  if (!(max_removal_fraction >= 0.0 && max_removal_fraction < 1.0))
    throw std::invalid_argument("low_degree_filter: fraction must lie in [0, 1)");
  const auto n = g.dimension();
  if (n == 0) return 0;

  std::size_t max_deg = 0;
  for (NodeId i = 0; i < n; ++i) max_deg = std::max(max_deg, g.degree(i));
  // below[d] = number of nodes with degree < d, for d in 0..max_deg+1.
  std::vector<std::size_t> hist(max_deg + 2, 0);
  for (NodeId i = 0; i < n; ++i) ++hist[g.degree(i)];
  const double budget = max_removal_fraction * static_cast<double>(n);

  std::size_t gamma = 0;
  std::size_t below = 0;
  for (std::size_t d = 0; d <= max_deg + 1; ++d) {
    if (static_cast<double>(below) <= budget) gamma = d;
    if (d <= max_deg) below += hist[d];
  }
  // Any gamma > max_deg + 1 removes the same nodes as max_deg + 1 (all of
  // them), which the fraction < 1 bound already rejects.
  return gamma;
}

DegreeFilterResult low_degree_filter(const SparseSymmetricMatrix& g,
                                     double max_removal_fraction) {
  DegreeFilterResult r;
  r.gamma = select_degree_threshold(g, max_removal_fraction);
  for (NodeId i = 0; i < g.dimension(); ++i)
    if (g.degree(i) >= r.gamma) r.kept.push_back(i);
  r.matrix = g.induced_subgraph(r.kept);
  return r;
}

double modularity(const LabeledGraph& g, bool restrict_to_labeled) {
  const auto& a = g.matrix;
  const auto& labels = g.labels;
  if (labels.size() != a.dimension())
    throw std::invalid_argument("modularity: label vector size mismatch");

  auto labeled = [&](NodeId i) { return labels[i] != kUnlabeled; };

  std::vector<double> k(a.dimension(), 0.0);
  double two_m = 0.0;
  for (NodeId i = 0; i < a.dimension(); ++i) {
    if (restrict_to_labeled && !labeled(i)) continue;
    for (const auto& e : a.row(i)) {
      if (restrict_to_labeled && !labeled(e.col)) continue;
      k[i] += e.weight;
    }
    two_m += k[i];
  }

  bool any_labeled_edge = false;
  for (NodeId i = 0; i < a.dimension() && !any_labeled_edge; ++i)
    if (labeled(i) && k[i] > 0.0) any_labeled_edge = true;
  if (!any_labeled_edge || !(two_m > 0.0))
    throw std::invalid_argument("modularity: no labeled edges");

  // Q = sum_c [ A_c / 2m - (K_c / 2m)^2 ] with A_c the ordered-pair
  // intra-community weight and K_c the community degree sum.
  std::int32_t max_label = -1;
  for (auto l : labels) max_label = std::max(max_label, l);
  std::vector<double> intra(static_cast<std::size_t>(max_label) + 1, 0.0);
  std::vector<double> deg(intra.size(), 0.0);
  for (NodeId i = 0; i < a.dimension(); ++i) {
    if (!labeled(i)) continue;
    const auto c = static_cast<std::size_t>(labels[i]);
    deg[c] += k[i];
    for (const auto& e : a.row(i))
      if (labeled(e.col) && labels[e.col] == labels[i]) intra[c] += e.weight;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < intra.size(); ++c)
    q += intra[c] / two_m - (deg[c] / two_m) * (deg[c] / two_m);
  return q;
}

std::vector<std::vector<NodeId>> connected_components(const SparseSymmetricMatrix& g) {
  const auto n = g.dimension();
  std::vector<NodeId> parent(n);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  g.for_each_edge([&](NodeId i, NodeId j, double) {
    auto a = find(i), b = find(j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  });

  std::vector<std::vector<NodeId>> comps;
  std::vector<std::size_t> slot(n, static_cast<std::size_t>(-1));
  for (NodeId i = 0; i < n; ++i) {
    auto r = find(i);
    if (slot[r] == static_cast<std::size_t>(-1)) {
      slot[r] = comps.size();
      comps.emplace_back();
    }
    comps[slot[r]].push_back(i);
  }
  return comps;
}

ComponentReport component_report(const SparseSymmetricMatrix& g) {
  ComponentReport rep;
  auto comps = connected_components(g);
  if (comps.empty()) return rep;
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& c : comps) rep.sizes.push_back(c.size());
  const auto& largest = comps.front();
  rep.largest_size = largest.size();
  if (largest.size() < 2) return rep;

  std::vector<std::int64_t> dist(g.dimension(), -1);
  double sum = 0.0;
  std::queue<NodeId> q;
  for (NodeId src : largest) {
    for (NodeId v : largest) dist[v] = -1;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (const auto& e : g.row(u))
        if (dist[e.col] < 0) {
          dist[e.col] = dist[u] + 1;
          sum += static_cast<double>(dist[e.col]);
          q.push(e.col);
        }
    }
  }
  const double pairs = static_cast<double>(largest.size()) * static_cast<double>(largest.size() - 1);
  rep.average_shortest_path = sum / pairs;
  return rep;
}

}  // namespace nprox
