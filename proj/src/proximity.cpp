#include "nprox/proximity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nprox {

std::string_view network_name(Network n) {
  switch (n) {
    case Network::S: return "S";
    case Network::P: return "P";
    case Network::H: return "H";
  }
  return "?";
}

Network parse_network(std::string_view name) {
  if (name == "S") return Network::S;
  if (name == "P") return Network::P;
  if (name == "H") return Network::H;
  throw std::invalid_argument("unknown proximity network: " + std::string(name));
}

namespace {

// Density above which the dense Gram product beats sparse accumulation.
constexpr double kDenseCosineDensity = 0.05;

std::vector<double> row_norms(const SparseSymmetricMatrix& m) {
  std::vector<double> norms(m.dimension(), 0.0);
  for (NodeId i = 0; i < m.dimension(); ++i) {
    double s = 0.0;
    for (const auto& e : m.row(i)) s += e.weight * e.weight;
    norms[i] = std::sqrt(s);
  }
  return norms;
}

}  // namespace

SparseSymmetricMatrix row_cosine_network(const SparseSymmetricMatrix& m, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("row_cosine_network: threshold must be >= 0");
  const auto n = m.dimension();
  const auto norms = row_norms(m);
  std::vector<Triplet> out;

  auto emit = [&](NodeId i, NodeId j, double dot) {
    if (norms[i] == 0.0 || norms[j] == 0.0) return;
    const double c = std::min(dot / (norms[i] * norms[j]), 1.0);
    if (c > threshold) out.push_back({i, j, c});
  };

  const double density = n == 0 ? 0.0
                                : 2.0 * static_cast<double>(m.edge_count()) /
                                      (static_cast<double>(n) * static_cast<double>(n));
  if (density > kDenseCosineDensity) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (NodeId i = 0; i < n; ++i)
      for (const auto& e : m.row(i)) x(i, e.col) = e.weight;
    Eigen::MatrixXd gram = x * x.transpose();
    for (NodeId j = 0; j < n; ++j)
      for (NodeId i = 0; i < j; ++i)
        if (gram(i, j) > 0.0) emit(i, j, gram(i, j));
  } else {
    // Row i of M * M^T via the columns (= rows, by symmetry) it touches.
    std::vector<double> acc(n, 0.0);
    std::vector<NodeId> touched;
    for (NodeId i = 0; i < n; ++i) {
      touched.clear();
      for (const auto& ik : m.row(i))
        for (const auto& kj : m.row(ik.col)) {
          if (kj.col <= i) continue;
          if (acc[kj.col] == 0.0) touched.push_back(kj.col);
          acc[kj.col] += ik.weight * kj.weight;
        }
      std::sort(touched.begin(), touched.end());
      for (NodeId j : touched) {
        emit(i, j, acc[j]);
        acc[j] = 0.0;
      }
    }
  }
  return SparseSymmetricMatrix::from_triplets(n, out);
}

SparseSymmetricMatrix mask_in_absentia(const SparseSymmetricMatrix& candidate,
                                       std::span<const SparseSymmetricMatrix* const> forbid) {
  for (const auto* f : forbid)
    if (f->dimension() != candidate.dimension())
      throw std::invalid_argument("mask_in_absentia: dimension mismatch");
  std::vector<Triplet> out;
  candidate.for_each_edge([&](NodeId i, NodeId j, double w) {
    for (const auto* f : forbid)
      if (f->contains(i, j)) return;
    out.push_back({i, j, w});
  });
  return SparseSymmetricMatrix::from_triplets(candidate.dimension(), out);
}

KMeans1D kmeans_1d_segment(std::span<const double> weights, std::size_t k) {
  if (k == 0) throw std::invalid_argument("kmeans_1d_segment: k must be >= 1");
  for (double w : weights)
    if (!std::isfinite(w) || w <= 0.0)
      throw std::invalid_argument("kmeans_1d_segment: weights must be positive and finite");

  std::vector<double> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> values;
  std::vector<double> counts;
  for (double w : sorted) {
    if (values.empty() || values.back() != w) {
      values.push_back(w);
      counts.push_back(0.0);
    }
    counts.back() += 1.0;
  }
  const std::size_t m = values.size();
  if (m < k) throw std::invalid_argument("degenerate weight distribution");

  // Centered prefix sums keep the SSE differences well conditioned.
  const double center = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                        static_cast<double>(sorted.size());
  std::vector<double> c(m + 1, 0.0), s1(m + 1, 0.0), s2(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = values[i] - center;
    c[i + 1] = c[i] + counts[i];
    s1[i + 1] = s1[i] + counts[i] * x;
    s2[i + 1] = s2[i] + counts[i] * x * x;
  }
  // SSE of distinct values [a, b).
  auto cost = [&](std::size_t a, std::size_t b) {
    const double n = c[b] - c[a];
    const double s = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - s * s / n);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(k, std::vector<double>(m + 1, kInf));
  std::vector<std::vector<std::size_t>> arg(k, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t b = 1; b <= m; ++b) dp[0][b] = cost(0, b);

  // The optimal split point is monotone in b (concave Monge cost), so each
  // layer is solved by divide and conquer in O(m log m).
  for (std::size_t j = 1; j < k; ++j) {
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t opt_lo,
                     std::size_t opt_hi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      double best = kInf;
      std::size_t best_a = std::max(opt_lo, j);
      for (std::size_t a = std::max(opt_lo, j); a <= std::min(opt_hi, mid - 1); ++a) {
        const double v = dp[j - 1][a] + cost(a, mid);
        if (v < best) {
          best = v;
          best_a = a;
        }
      }
      dp[j][mid] = best;
      arg[j][mid] = best_a;
      if (mid > lo) self(self, lo, mid - 1, opt_lo, best_a);
      self(self, mid + 1, hi, best_a, opt_hi);
    };
    solve(solve, j + 1, m, j, m - 1);
  }

  std::vector<std::size_t> bounds(k + 1, 0);
  bounds[k] = m;
  for (std::size_t j = k - 1; j > 0; --j) bounds[j] = arg[j][bounds[j + 1]];

  KMeans1D out;
  out.centroids.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double sw = 0.0, n = 0.0;
    for (std::size_t i = bounds[j]; i < bounds[j + 1]; ++i) {
      sw += counts[i] * values[i];
      n += counts[i];
    }
    out.centroids[j] = sw / n;
  }
  out.assignment.reserve(weights.size());
  for (double w : weights) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(values.begin(), values.end(), w) - values.begin());
    const auto cls = static_cast<std::size_t>(
        std::upper_bound(bounds.begin() + 1, bounds.end(), pos) - (bounds.begin() + 1));
    out.assignment.push_back(static_cast<std::uint8_t>(cls + 1));
    const double d = w - out.centroids[cls];
    out.sse += d * d;
  }
  return out;
}

const SparseSymmetricMatrix& ProximityStack::network(Network n) const {
  switch (n) {
    case Network::S: return s;
    case Network::P: return p;
    case Network::H: return h;
  }
  throw std::invalid_argument("bad network");
}

std::uint8_t ProximityStack::class_of(Network n, NodeId i, NodeId j) const {
  const auto& wc = classes[static_cast<std::size_t>(n)];
  if (!wc.segmented()) return 0;
  const auto row = network(n).row(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Entry& e, NodeId c) { return e.col < c; });
  if (it == row.end() || it->col != j) return 0;
  return wc.per_row[i][static_cast<std::size_t>(it - row.begin())];
}

void segment_stack(ProximityStack& stack, std::size_t k) {
  for (Network net : kNetworks) {
    const auto& g = stack.network(net);
    auto& wc = stack.classes[static_cast<std::size_t>(net)];
    wc = WeightClasses{};
    if (g.empty()) continue;

    std::vector<double> weights;
    weights.reserve(g.edge_count());
    g.for_each_edge([&](NodeId, NodeId, double w) { weights.push_back(w); });
    KMeans1D km;
    try {
      km = kmeans_1d_segment(weights, k);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("network " + std::string(network_name(net)) + ": " + e.what());
    }

    wc.centroids = km.centroids;
    wc.class_means.assign(k, 0.0);
    std::vector<double> sizes(k, 0.0);
    for (std::size_t e = 0; e < weights.size(); ++e) {
      wc.class_means[km.assignment[e] - 1] += weights[e];
      sizes[km.assignment[e] - 1] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) wc.class_means[c] /= sizes[c];

    // for_each_edge visits upper-triangle entries in row order; mirror them.
    wc.per_row.resize(g.dimension());
    for (NodeId i = 0; i < g.dimension(); ++i) wc.per_row[i].assign(g.degree(i), 0);
    std::size_t e = 0;
    for (NodeId i = 0; i < g.dimension(); ++i) {
      const auto row = g.row(i);
      for (std::size_t pos = 0; pos < row.size(); ++pos) {
        if (row[pos].col <= i) continue;
        const auto cls = km.assignment[e++];
        wc.per_row[i][pos] = cls;
        const NodeId j = row[pos].col;
        const auto back = g.row(j);
        auto it = std::lower_bound(back.begin(), back.end(), i,
                                   [](const Entry& x, NodeId c) { return x.col < c; });
        wc.per_row[j][static_cast<std::size_t>(it - back.begin())] = cls;
      }
    }
  }
}

ProximityStack build_stack(const SparseSymmetricMatrix& s, const StackOptions& opts) {
  ProximityStack stack;
  stack.s = s;
  const SparseSymmetricMatrix* only_s[] = {&stack.s};
  stack.p = mask_in_absentia(row_cosine_network(stack.s, opts.threshold), only_s);
  auto h_hat = row_cosine_network(stack.p, opts.threshold);
  if (opts.masking == MaskingRule::prose) {
    const SparseSymmetricMatrix* forbid[] = {&stack.s, &stack.p};
    stack.h = mask_in_absentia(h_hat, forbid);
  } else {
    const SparseSymmetricMatrix* forbid[] = {&stack.p};
    stack.h = mask_in_absentia(h_hat, forbid);
  }
  segment_stack(stack, opts.classes);
  return stack;
}

NeighborhoodPartition neighborhood_partition(const ProximityStack& stack, NodeId t) {
  const auto n = stack.dimension();
  if (t >= n) throw std::out_of_range("neighborhood_partition: target out of range");
  NeighborhoodPartition part;
  part.target = t;

  constexpr std::uint8_t kFree = 0xff;
  std::vector<std::uint8_t> cell(n, kFree);
  cell[t] = 0;  // placeholder; the target itself is never emitted
  for (Network net : kNetworks) {
    const auto& wc = stack.classes[static_cast<std::size_t>(net)];
    const auto row = stack.network(net).row(t);
    for (std::size_t pos = 0; pos < row.size(); ++pos) {
      const NodeId v = row[pos].col;
      if (cell[v] != kFree) continue;
      if (!wc.segmented())
        throw std::logic_error("neighborhood_partition: network " +
                               std::string(network_name(net)) + " is not segmented");
      cell[v] = static_cast<std::uint8_t>(cell_index(net, wc.per_row[t][pos]));
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (v == t) continue;
    part.cells[cell[v] == kFree ? 0 : cell[v]].push_back(v);
  }
  return part;
}

}  // namespace nprox
