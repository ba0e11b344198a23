#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nprox/sparse_matrix.hpp"

namespace nprox {

enum class Network : std::uint8_t { S = 0, P = 1, H = 2 };
inline constexpr std::array<Network, 3> kNetworks{Network::S, Network::P, Network::H};
inline constexpr std::size_t kWeightClasses = 4;

std::string_view network_name(Network n);
Network parse_network(std::string_view name);  // throws std::invalid_argument

// Cosine similarity between rows i != j, kept when strictly above
// `threshold`. Zero rows produce no edges.
SparseSymmetricMatrix row_cosine_network(const SparseSymmetricMatrix& m,
                                         double threshold = 0.0);

// Keeps the entries of `candidate` that are absent from every `forbid` matrix.
SparseSymmetricMatrix mask_in_absentia(
    const SparseSymmetricMatrix& candidate,
    std::span<const SparseSymmetricMatrix* const> forbid);

struct KMeans1D {
  std::vector<std::uint8_t> assignment;  // 1..k per input weight, input order
  std::vector<double> centroids;         // strictly ascending
  double sse = 0.0;
};

// Globally optimal 1-D k-means by dynamic programming over the sorted
// distinct values (equal weights always share a class). Classes are numbered
// 1..k by ascending centroid. Throws std::invalid_argument("degenerate weight
// distribution") when there are fewer than k distinct values.
KMeans1D kmeans_1d_segment(std::span<const double> weights, std::size_t k);

struct WeightClasses {
  // Aligned with the network's row storage: per_row[i][n] is the class of
  // row(i)[n]. Empty when the network has no edges.
  std::vector<std::vector<std::uint8_t>> per_row;
  std::vector<double> centroids;
  std::vector<double> class_means;  // mean edge weight of each class
  bool segmented() const { return !centroids.empty(); }
};

enum class MaskingRule {
  // H excludes both S and P supports.
  prose,
  // H excludes only the P support; S edges may reappear in H.
  formula,
};

struct StackOptions {
  double threshold = 0.0;
  MaskingRule masking = MaskingRule::prose;
  std::size_t classes = kWeightClasses;
};

struct ProximityStack {
  SparseSymmetricMatrix s, p, h;
  std::array<WeightClasses, 3> classes;

  std::size_t dimension() const { return s.dimension(); }
  const SparseSymmetricMatrix& network(Network n) const;
  // 0 when (i, j) is not an edge of `n`.
  std::uint8_t class_of(Network n, NodeId i, NodeId j) const;
};

// S -> P = mask(cos(S), [S]) -> H = mask(cos(P), [S, P]) (or [P] under the
// formula rule), then k-means segmentation of each network's edge weights.
ProximityStack build_stack(const SparseSymmetricMatrix& s, const StackOptions& opts = {});

// Attaches k-means classes to already-built networks.
void segment_stack(ProximityStack& stack, std::size_t k = kWeightClasses);

// 13 disjoint cells over V \ {t}: index 0 is the W0 control, index
// 1 + 4 * network + (class - 1) the (network, class) cells.
inline constexpr std::size_t kPartitionCells = 1 + 3 * kWeightClasses;

constexpr std::size_t cell_index(Network n, std::size_t weight_class) {
  return 1 + static_cast<std::size_t>(n) * kWeightClasses + (weight_class - 1);
}

struct NeighborhoodPartition {
  NodeId target = 0;
  std::array<std::vector<NodeId>, kPartitionCells> cells;
};

// Pairs that are edges of several networks (possible only under the formula
// masking rule) go to the lowest-order one.
NeighborhoodPartition neighborhood_partition(const ProximityStack& stack, NodeId t);

}  // namespace nprox
