#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nprox {

using NodeId = std::uint32_t;

struct Entry {
  NodeId col;
  double weight;
};

struct Triplet {
  NodeId i;
  NodeId j;
  double weight;
};

// Weighted undirected graph stored as a symmetric sparse matrix. Both
// directions of every edge are kept in row-sorted adjacency lists so row
// access is O(1) and lookups are O(log deg). There are never diagonal entries
// or explicit zeros.
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;
  explicit SparseSymmetricMatrix(std::size_t dimension) : rows_(dimension) {}

  // Builds from (i, j, w) triplets in either orientation. Duplicate cells are
  // summed; diagonal triplets and cells whose final weight is zero are dropped.
  // Throws std::invalid_argument on negative or non-finite weights or
  // out-of-range indices.
  static SparseSymmetricMatrix from_triplets(std::size_t dimension,
                                             std::span<const Triplet> triplets);

  std::size_t dimension() const { return rows_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return edge_count_ == 0; }

  std::span<const Entry> row(NodeId i) const { return rows_[i]; }
  double at(NodeId i, NodeId j) const;
  bool contains(NodeId i, NodeId j) const;

  // Unweighted incident-edge count.
  std::size_t degree(NodeId i) const { return rows_[i].size(); }
  double weighted_degree(NodeId i) const;

  // Sum over unordered pairs i < j.
  double total_weight() const;

  // Canonical i < j listing in row-major order.
  std::vector<Triplet> triplets() const;

  template <typename F>
  void for_each_edge(F&& f) const {
    for (NodeId i = 0; i < rows_.size(); ++i)
      for (const auto& e : rows_[i])
        if (e.col > i) f(i, e.col, e.weight);
  }

  // Keeps the rows listed in `kept` (ascending old indices) and renumbers them
  // 0..kept.size()-1.
  SparseSymmetricMatrix induced_subgraph(std::span<const NodeId> kept) const;

  SparseSymmetricMatrix scaled(double factor) const;

  friend bool operator==(const SparseSymmetricMatrix&,
                         const SparseSymmetricMatrix&);

 private:
  std::vector<std::vector<Entry>> rows_;
  std::size_t edge_count_ = 0;
};

bool operator==(const Entry& a, const Entry& b);

}  // namespace nprox
