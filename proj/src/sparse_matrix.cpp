#include "nprox/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nprox {

bool operator==(const Entry& a, const Entry& b) {
  return a.col == b.col && a.weight == b.weight;
}

bool operator==(const SparseSymmetricMatrix& a, const SparseSymmetricMatrix& b) {
  return a.edge_count_ == b.edge_count_ && a.rows_ == b.rows_;
}

SparseSymmetricMatrix SparseSymmetricMatrix::from_triplets(
    std::size_t dimension, std::span<const Triplet> triplets) {
  std::vector<Triplet> canon;
  canon.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (t.i >= dimension || t.j >= dimension)
      throw std::invalid_argument("triplet index out of range: (" +
                                  std::to_string(t.i) + ", " +
                                  std::to_string(t.j) + ")");
    if (!std::isfinite(t.weight) || t.weight < 0.0)
      throw std::invalid_argument("triplet weight must be finite and >= 0");
    if (t.i == t.j) continue;
    canon.push_back(t.i < t.j ? t : Triplet{t.j, t.i, t.weight});
  }
  std::sort(canon.begin(), canon.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  SparseSymmetricMatrix m(dimension);
  for (std::size_t k = 0; k < canon.size();) {
    double w = 0.0;
    std::size_t l = k;
    for (; l < canon.size() && canon[l].i == canon[k].i && canon[l].j == canon[k].j;
         ++l)
      w += canon[l].weight;
    if (w > 0.0) {
      m.rows_[canon[k].i].push_back({canon[k].j, w});
      m.rows_[canon[k].j].push_back({canon[k].i, w});
      ++m.edge_count_;
    }
    k = l;
  }
  for (auto& r : m.rows_)
    std::sort(r.begin(), r.end(),
              [](const Entry& a, const Entry& b) { return a.col < b.col; });
  return m;
}

double SparseSymmetricMatrix::at(NodeId i, NodeId j) const {
  const auto& r = rows_[i];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, NodeId c) { return e.col < c; });
  return it != r.end() && it->col == j ? it->weight : 0.0;
}

bool SparseSymmetricMatrix::contains(NodeId i, NodeId j) const {
  const auto& r = rows_[i];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, NodeId c) { return e.col < c; });
  return it != r.end() && it->col == j;
}

double SparseSymmetricMatrix::weighted_degree(NodeId i) const {
  double s = 0.0;
  for (const auto& e : rows_[i]) s += e.weight;
  return s;
}

double SparseSymmetricMatrix::total_weight() const {
  double s = 0.0;
  for_each_edge([&](NodeId, NodeId, double w) { s += w; });
  return s;
}

std::vector<Triplet> SparseSymmetricMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(edge_count_);
  for_each_edge([&](NodeId i, NodeId j, double w) { out.push_back({i, j, w}); });
  return out;
}

SparseSymmetricMatrix SparseSymmetricMatrix::induced_subgraph(
    std::span<const NodeId> kept) const {
  constexpr NodeId kDropped = static_cast<NodeId>(-1);
  std::vector<NodeId> remap(rows_.size(), kDropped);
  for (std::size_t k = 0; k < kept.size(); ++k) remap[kept[k]] = static_cast<NodeId>(k);

  SparseSymmetricMatrix m(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (const auto& e : rows_[kept[k]]) {
      if (remap[e.col] == kDropped) continue;
      m.rows_[k].push_back({remap[e.col], e.weight});
      if (remap[e.col] > k) ++m.edge_count_;
    }
  }
  return m;
}

SparseSymmetricMatrix SparseSymmetricMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("scale factor must be positive and finite");
  SparseSymmetricMatrix m = *this;
  for (auto& r : m.rows_)
    for (auto& e : r) e.weight *= factor;
  return m;
}

}  // namespace nprox
