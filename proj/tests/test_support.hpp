#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nprox/sparse_matrix.hpp"

namespace nprox::test {

// Dense symmetric copy of a sparse matrix.
inline std::vector<std::vector<double>> dense(const SparseSymmetricMatrix& m) {
  const auto n = m.dimension();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  m.for_each_edge([&](NodeId i, NodeId j, double w) { a[i][j] = a[j][i] = w; });
  return a;
}

// Erdos-Renyi graph with uniform weights in (0.1, 1].
inline SparseSymmetricMatrix random_graph(std::size_t n, double p, std::mt19937_64& rng,
                                          double wmax = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Triplet> t;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(rng) < p) t.push_back({i, j, 0.1 + (wmax - 0.1) * u(rng)});
  return SparseSymmetricMatrix::from_triplets(n, t);
}

// Integer counts in 1..maxc on a dense random support.
inline SparseSymmetricMatrix random_counts(std::size_t n, double p, int maxc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(1, maxc);
  std::vector<Triplet> t;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(rng) < p) t.push_back({i, j, static_cast<double>(c(rng))});
  return SparseSymmetricMatrix::from_triplets(n, t);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("nprox-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace nprox::test
