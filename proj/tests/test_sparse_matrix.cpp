#include <random>
#include <stdexcept>

#include "doctest.h"
#include "nprox/sparse_matrix.hpp"
#include "test_support.hpp"

using namespace nprox;

TEST_CASE("from_triplets sums duplicates and drops diagonal and zeros") {
  std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, 2.0}, {2, 2, 5.0}, {1, 2, 0.0}, {0, 3, 0.5}};
  const auto m = SparseSymmetricMatrix::from_triplets(4, t);
  CHECK(m.dimension() == 4);
  CHECK(m.edge_count() == 2);
  CHECK(m.at(0, 1) == 3.0);
  CHECK(m.at(1, 0) == 3.0);
  CHECK(m.at(2, 2) == 0.0);
  CHECK_FALSE(m.contains(1, 2));
  CHECK(m.degree(0) == 2);
  CHECK(m.weighted_degree(0) == doctest::Approx(3.5));
  CHECK(m.total_weight() == doctest::Approx(3.5));
}

TEST_CASE("from_triplets rejects bad input") {
  std::vector<Triplet> neg{{0, 1, -1.0}};
  CHECK_THROWS_AS(SparseSymmetricMatrix::from_triplets(2, neg), std::invalid_argument);
  std::vector<Triplet> nan{{0, 1, std::nan("")}};
  CHECK_THROWS_AS(SparseSymmetricMatrix::from_triplets(2, nan), std::invalid_argument);
  std::vector<Triplet> oob{{0, 2, 1.0}};
  CHECK_THROWS_AS(SparseSymmetricMatrix::from_triplets(2, oob), std::invalid_argument);
}

TEST_CASE("symmetry and canonical triplets on random graphs") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = test::random_graph(15, 0.3, rng);
    const auto a = test::dense(m);
    for (NodeId i = 0; i < 15; ++i) {
      CHECK(m.at(i, i) == 0.0);
      for (NodeId j = 0; j < 15; ++j) CHECK(m.at(i, j) == m.at(j, i));
    }
    const auto t = m.triplets();
    CHECK(t.size() == m.edge_count());
    for (const auto& e : t) {
      CHECK(e.i < e.j);
      CHECK(a[e.i][e.j] == e.weight);
    }
    CHECK(SparseSymmetricMatrix::from_triplets(15, t) == m);
  }
}

TEST_CASE("induced subgraph renumbers rows") {
  std::vector<Triplet> t{{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}, {0, 3, 4.0}};
  const auto m = SparseSymmetricMatrix::from_triplets(4, t);
  std::vector<NodeId> kept{1, 2, 3};
  const auto s = m.induced_subgraph(kept);
  CHECK(s.dimension() == 3);
  CHECK(s.edge_count() == 2);
  CHECK(s.at(0, 1) == 2.0);
  CHECK(s.at(1, 2) == 3.0);
  CHECK(m.scaled(2.0).at(0, 3) == 8.0);
}
