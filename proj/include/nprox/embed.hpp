#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nprox/ingest.hpp"
#include "nprox/sparse_matrix.hpp"

namespace nprox {

// |V| x d node vectors; row i belongs to vocabulary index i.
struct EmbeddingMatrix {
  Eigen::MatrixXd vectors;

  std::size_t rows() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  bool finite() const { return vectors.allFinite(); }
};

enum class SvdMethod { automatic, dense, randomized };

struct SvdOptions {
  SvdMethod method = SvdMethod::automatic;
  std::size_t oversampling = 10;
  std::size_t power_iterations = 4;
  std::size_t dense_limit = 512;  // automatic uses dense at or below this |V|
};

// Rank-d truncated SVD S ~ B Sigma C*, returning B Sigma. Each column is
// signed so its largest-magnitude entry is positive.
EmbeddingMatrix svd_embed(const SparseSymmetricMatrix& s, std::size_t d, std::uint64_t seed,
                          const SvdOptions& opts = {});

struct WalkStrategy {
  enum class Kind { uniform, node2vec } kind = Kind::uniform;
  double p = 1.0;
  double q = 1.0;

  static WalkStrategy uniform() { return {}; }
  static WalkStrategy node2vec(double p, double q) { return {Kind::node2vec, p, q}; }
};

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  std::size_t walks_per_node = 0;
  std::size_t walk_length = 0;
  WalkStrategy strategy;
};

// `walks_per_node` walks from every node, each of at most `length` nodes.
// Transitions are proportional to edge weight; node2vec additionally scales
// by 1/p for returning to the previous node, 1 for nodes adjacent to it and
// 1/q otherwise. Every walk has its own generator derived from (seed, round,
// start node).
WalkCorpus generate_walks(const SparseSymmetricMatrix& s, const WalkStrategy& strategy,
                          std::size_t walks_per_node, std::size_t length, std::uint64_t seed,
                          std::size_t threads = 1);

struct SgnsConfig {
  std::size_t dim = 128;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 100;
  double initial_learning_rate = 0.025;
  double min_learning_rate_fraction = 1e-4;
  double unigram_power = 0.75;
  std::size_t monitor_pairs = 2000;
  std::uint64_t seed = 0;
  // 1 = deterministic single-threaded; >1 = asynchronous lock-free updates.
  std::size_t threads = 1;
};

struct SgnsResult {
  EmbeddingMatrix embedding;
  // Mean loss per epoch over a fixed monitor batch of (center, context,
  // negatives) samples.
  std::vector<double> epoch_losses;
};

struct SgnsLoss {
  double loss = 0.0;
  Eigen::VectorXd grad_center;
  Eigen::VectorXd grad_context;
  std::vector<Eigen::VectorXd> grad_negatives;
};

// -log sigma(u_o . v_c) - sum_k log sigma(-u_k . v_c) and its gradients.
SgnsLoss sgns_objective(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                        std::span<const Eigen::VectorXd> negatives);

SgnsResult train_sgns(const WalkCorpus& corpus, std::size_t num_nodes, const SgnsConfig& cfg);

// i.i.d. standard normal rows; the random-embedding baseline.
EmbeddingMatrix random_embedding(std::size_t rows, std::size_t dim, std::uint64_t seed);

// Text format: header "<rows> <dim>", then "item-id v_1 ... v_dim" per row.
void store_embedding(const std::filesystem::path& path, const EmbeddingMatrix& e,
                     const Vocabulary& vocab);
// Rows are reordered to vocabulary order. Every vocabulary item must appear
// exactly once; errors name the offending line.
EmbeddingMatrix load_embedding(const std::filesystem::path& path, const Vocabulary& vocab);

void store_walks(const std::filesystem::path& path, const WalkCorpus& corpus);

}  // namespace nprox
