#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "nprox/sparse_matrix.hpp"

namespace nprox {

// PPMI of a co-occurrence matrix: max(log2(p(i,j) / (p(i) p(j))), 0) with
// p(i,j) = w_ij / W, p(i) = sum_j w_ij / W and W the sum over unordered pairs.
// Cells at or below 1e-12 after clamping are dropped. Throws on an all-zero
// input.
SparseSymmetricMatrix ppmi_transform(const SparseSymmetricMatrix& counts);

struct DegreeFilterResult {
  SparseSymmetricMatrix matrix;
  std::size_t gamma = 0;
  std::vector<NodeId> kept;  // surviving original indices, ascending
};

// Largest integer gamma whose single-pass removal of nodes with
// (unweighted) degree < gamma removes at most `max_removal_fraction` of the
// nodes.
std::size_t select_degree_threshold(const SparseSymmetricMatrix& g,
                                    double max_removal_fraction);

DegreeFilterResult low_degree_filter(const SparseSymmetricMatrix& g,
                                     double max_removal_fraction);

inline constexpr std::int32_t kUnlabeled = -1;

struct LabeledGraph {
  const SparseSymmetricMatrix& matrix;
  // One label per node; kUnlabeled for nodes without a category.
  const std::vector<std::int32_t>& labels;
};

// Newman weighted modularity over labeled nodes. With `restrict_to_labeled`
// the total weight m and degrees k are taken from the subgraph induced by the
// labeled nodes; otherwise from the full graph.
double modularity(const LabeledGraph& g, bool restrict_to_labeled);

std::vector<std::vector<NodeId>> connected_components(const SparseSymmetricMatrix& g);

struct ComponentReport {
  std::vector<std::size_t> sizes;  // descending
  std::size_t largest_size = 0;
  // Mean unweighted BFS distance over ordered pairs of the largest component.
  double average_shortest_path = 0.0;
};

ComponentReport component_report(const SparseSymmetricMatrix& g);

}  // namespace nprox
