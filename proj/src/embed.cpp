#include "nprox/embed.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "nprox/parallel.hpp"
#include "nprox/random.hpp"

namespace nprox {

namespace {

void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < 0.0) m.col(c) *= -1.0;
  }
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

EmbeddingMatrix svd_embed(const SparseSymmetricMatrix& s, std::size_t d, std::uint64_t seed,
                          const SvdOptions& opts) {
  const auto n = s.dimension();
  if (d == 0) throw std::invalid_argument("svd_embed: d must be >= 1");
  if (d > n) throw std::invalid_argument("svd_embed: d exceeds |V|");

  bool dense = opts.method == SvdMethod::dense ||
               (opts.method == SvdMethod::automatic && n <= opts.dense_limit);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto dd = static_cast<Eigen::Index>(d);

  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  if (dense) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
    s.for_each_edge([&](NodeId i, NodeId j, double w) { a(i, j) = a(j, i) = w; });
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    u = svd.matrixU().leftCols(dd);
    sigma = svd.singularValues().head(dd);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * s.edge_count());
    s.for_each_edge([&](NodeId i, NodeId j, double w) {
      trip.emplace_back(i, j, w);
      trip.emplace_back(j, i, w);
    });
    Eigen::SparseMatrix<double> a(nn, nn);
    a.setFromTriplets(trip.begin(), trip.end());

    const auto k = static_cast<Eigen::Index>(std::min(n, d + opts.oversampling));
    Rng rng(seed);
    Eigen::MatrixXd omega(nn, k);
    for (Eigen::Index c = 0; c < k; ++c)
      for (Eigen::Index r = 0; r < nn; ++r) omega(r, c) = rng.normal();

    Eigen::MatrixXd q = orthonormal_basis(a * omega);
    for (std::size_t it = 0; it < opts.power_iterations; ++it) {
      q = orthonormal_basis(a.transpose() * q);
      q = orthonormal_basis(a * q);
    }
    Eigen::MatrixXd b = q.transpose() * a;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
    u = (q * svd.matrixU()).leftCols(dd);
    sigma = svd.singularValues().head(dd);
  }

  EmbeddingMatrix e;
  e.vectors = u * sigma.asDiagonal();
  fix_column_signs(e.vectors);
  return e;
}

WalkCorpus generate_walks(const SparseSymmetricMatrix& s, const WalkStrategy& strategy,
                          std::size_t walks_per_node, std::size_t length, std::uint64_t seed,
                          std::size_t threads) {
  if (length < 2) throw std::invalid_argument("generate_walks: length must be >= 2");
  if (strategy.kind == WalkStrategy::Kind::node2vec && !(strategy.p > 0.0 && strategy.q > 0.0))
    throw std::invalid_argument("generate_walks: node2vec p and q must be > 0");

  const auto n = s.dimension();
  // First-order cumulative weights per row.
  std::vector<std::vector<double>> cumulative(n);
  for (NodeId i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& e : s.row(i)) cumulative[i].push_back(acc += e.weight);
  }

  auto first_order = [&](NodeId cur, Rng& rng) {
    const auto& cw = cumulative[cur];
    const double r = rng.uniform() * cw.back();
    auto pos = static_cast<std::size_t>(std::upper_bound(cw.begin(), cw.end(), r) - cw.begin());
    return s.row(cur)[std::min(pos, cw.size() - 1)].col;
  };

  WalkCorpus corpus;
  corpus.walks_per_node = walks_per_node;
  corpus.walk_length = length;
  corpus.strategy = strategy;
  corpus.walks.resize(walks_per_node * n);

  parallel_for(corpus.walks.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> biased;
    for (std::size_t w = begin; w < end; ++w) {
      const std::size_t round = w / n;
      const auto start = static_cast<NodeId>(w % n);
      Rng rng(derive_seed(derive_seed(seed, round), start));
      auto& walk = corpus.walks[w];
      walk.reserve(length);
      walk.push_back(start);
      while (walk.size() < length) {
        const NodeId cur = walk.back();
        if (s.degree(cur) == 0) break;
        if (strategy.kind == WalkStrategy::Kind::uniform || walk.size() == 1) {
          walk.push_back(first_order(cur, rng));
          continue;
        }
        const NodeId prev = walk[walk.size() - 2];
        const auto row = s.row(cur);
        biased.resize(row.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
          const NodeId x = row[k].col;
          double bias;
          if (x == prev) bias = 1.0 / strategy.p;
          else if (s.contains(prev, x)) bias = 1.0;
          else bias = 1.0 / strategy.q;
          biased[k] = acc += row[k].weight * bias;
        }
        const double r = rng.uniform() * acc;
        auto pos = static_cast<std::size_t>(std::upper_bound(biased.begin(), biased.end(), r) -
                                            biased.begin());
        walk.push_back(row[std::min(pos, row.size() - 1)].col);
      }
    }
  });
  return corpus;
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log sigma(x) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

SgnsLoss sgns_objective(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                        std::span<const Eigen::VectorXd> negatives) {
  SgnsLoss out;
  const double pos = context.dot(center);
  out.loss = -log_sigmoid(pos);
  // d/dx -log sigma(x) = sigma(x) - 1
  const double gpos = sigmoid(pos) - 1.0;
  out.grad_center = gpos * context;
  out.grad_context = gpos * center;
  for (const auto& neg : negatives) {
    const double x = neg.dot(center);
    out.loss -= log_sigmoid(-x);
    const double g = sigmoid(x);  // d/dx -log sigma(-x)
    out.grad_center += g * neg;
    out.grad_negatives.push_back(g * center);
  }
  return out;
}

namespace {

class NegativeSampler {
 public:
  NegativeSampler(const WalkCorpus& corpus, std::size_t num_nodes, double power) {
    std::vector<double> freq(num_nodes, 0.0);
    for (const auto& w : corpus.walks)
      for (NodeId v : w) freq[v] += 1.0;
    double acc = 0.0;
    cumulative_.reserve(num_nodes);
    for (double f : freq) cumulative_.push_back(acc += std::pow(f, power));
  }

  NodeId sample(Rng& rng) const {
    const double r = rng.uniform() * cumulative_.back();
    auto pos = std::upper_bound(cumulative_.begin(), cumulative_.end(), r) - cumulative_.begin();
    return static_cast<NodeId>(std::min<std::size_t>(static_cast<std::size_t>(pos),
                                                     cumulative_.size() - 1));
  }

 private:
  std::vector<double> cumulative_;
};

// Row-major |V| x d storage; relaxed atomics make asynchronous updates
// well-defined without locking.
struct Vectors {
  std::vector<double> data;
  std::size_t dim;
  double* row(NodeId v) { return data.data() + static_cast<std::size_t>(v) * dim; }
};

template <bool Atomic>
inline double load(double& x) {
  if constexpr (Atomic) return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
  else return x;
}

template <bool Atomic>
inline void store(double& x, double v) {
  if constexpr (Atomic) std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  else x = v;
}

template <bool Atomic>
void train_walks(std::span<const std::vector<NodeId>> walks, Vectors& in, Vectors& out,
                 const NegativeSampler& sampler, const SgnsConfig& cfg, Rng& rng,
                 std::atomic<std::uint64_t>& processed, std::uint64_t total_pairs) {
  const std::size_t d = in.dim;
  std::vector<double> grad(d), center(d);
  const double min_lr = cfg.initial_learning_rate * cfg.min_learning_rate_fraction;
  for (const auto& walk : walks) {
    const auto len = walk.size();
    for (std::size_t i = 0; i < len; ++i) {
      const auto done = processed.load(std::memory_order_relaxed);
      const double lr = std::max(
          min_lr, cfg.initial_learning_rate *
                      (1.0 - static_cast<double>(done) / static_cast<double>(total_pairs + 1)));
      const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
      const std::size_t hi = std::min(len - 1, i + cfg.window);
      double* v = in.row(walk[i]);
      std::uint64_t pairs = 0;
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        ++pairs;
        for (std::size_t k = 0; k < d; ++k) {
          center[k] = load<Atomic>(v[k]);
          grad[k] = 0.0;
        }
        const NodeId context = walk[j];
        for (std::size_t s = 0; s <= cfg.negatives; ++s) {
          NodeId target;
          double label;
          if (s == 0) {
            target = context;
            label = 1.0;
          } else {
            target = sampler.sample(rng);
            if (target == context) continue;
            label = 0.0;
          }
          double* u = out.row(target);
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) dot += center[k] * load<Atomic>(u[k]);
          const double g = (label - sigmoid(dot)) * lr;
          for (std::size_t k = 0; k < d; ++k) {
            const double uk = load<Atomic>(u[k]);
            grad[k] += g * uk;
            store<Atomic>(u[k], uk + g * center[k]);
          }
        }
        for (std::size_t k = 0; k < d; ++k) store<Atomic>(v[k], load<Atomic>(v[k]) + grad[k]);
      }
      processed.fetch_add(pairs, std::memory_order_relaxed);
    }
  }
}

struct MonitorSample {
  NodeId center;
  NodeId context;
  std::vector<NodeId> negatives;
};

}  // namespace

SgnsResult train_sgns(const WalkCorpus& corpus, std::size_t num_nodes, const SgnsConfig& cfg) {
  if (cfg.window < 1) throw std::invalid_argument("train_sgns: window must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("train_sgns: epochs must be >= 1");
  if (cfg.dim < 1) throw std::invalid_argument("train_sgns: dim must be >= 1");
  std::uint64_t pairs_per_epoch = 0;
  for (const auto& w : corpus.walks) {
    for (NodeId v : w)
      if (v >= num_nodes)
        throw std::invalid_argument("train_sgns: walk node " + std::to_string(v) +
                                    " outside the graph vocabulary");
    for (std::size_t i = 0; i < w.size(); ++i)
      pairs_per_epoch += std::min(w.size() - 1, i + cfg.window) - (i >= cfg.window ? i - cfg.window : 0);
  }
  if (pairs_per_epoch == 0) throw std::invalid_argument("train_sgns: corpus has no training pairs");

  Rng rng(cfg.seed);
  Vectors in{std::vector<double>(num_nodes * cfg.dim), cfg.dim};
  Vectors out{std::vector<double>(num_nodes * cfg.dim, 0.0), cfg.dim};
  for (auto& x : in.data) x = (rng.uniform() - 0.5) / static_cast<double>(cfg.dim);

  NegativeSampler sampler(corpus, num_nodes, cfg.unigram_power);

  // Fixed monitor batch drawn once from the corpus.
  std::vector<MonitorSample> monitor;
  {
    Rng mrng(derive_seed(cfg.seed, "monitor"));
    std::vector<std::size_t> nonempty;
    for (std::size_t w = 0; w < corpus.walks.size(); ++w)
      if (corpus.walks[w].size() >= 2) nonempty.push_back(w);
    for (std::size_t m = 0; m < cfg.monitor_pairs && !nonempty.empty(); ++m) {
      const auto& walk = corpus.walks[nonempty[mrng.below(nonempty.size())]];
      const auto i = mrng.below(walk.size());
      std::size_t j;
      do {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + cfg.window);
        j = lo + mrng.below(hi - lo + 1);
      } while (j == i);
      MonitorSample ms{walk[i], walk[j], {}};
      for (std::size_t k = 0; k < cfg.negatives; ++k) ms.negatives.push_back(sampler.sample(mrng));
      monitor.push_back(std::move(ms));
    }
  }
  auto monitor_loss = [&] {
    double total = 0.0;
    for (const auto& ms : monitor) {
      const auto d = static_cast<Eigen::Index>(cfg.dim);
      Eigen::Map<const Eigen::VectorXd> c(in.row(ms.center), d);
      Eigen::Map<const Eigen::VectorXd> o(out.row(ms.context), d);
      total -= log_sigmoid(o.dot(c));
      for (NodeId ng : ms.negatives) {
        Eigen::Map<const Eigen::VectorXd> u(out.row(ng), d);
        total -= log_sigmoid(-u.dot(c));
      }
    }
    return monitor.empty() ? 0.0 : total / static_cast<double>(monitor.size());
  };

  const std::uint64_t total_pairs = pairs_per_epoch * cfg.epochs;
  std::atomic<std::uint64_t> processed{0};
  SgnsResult result;
  const std::span<const std::vector<NodeId>> walks(corpus.walks);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.threads <= 1) {
      train_walks<false>(walks, in, out, sampler, cfg, rng, processed, total_pairs);
    } else {
      const std::uint64_t epoch_seed = derive_seed(cfg.seed, epoch + 1);
      const std::size_t threads = cfg.threads;
      const std::size_t chunk = (walks.size() + threads - 1) / threads;
      parallel_for(threads, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
          const std::size_t lo = std::min(walks.size(), t * chunk);
          const std::size_t hi = std::min(walks.size(), lo + chunk);
          Rng trng(derive_seed(epoch_seed, t));
          train_walks<true>(walks.subspan(lo, hi - lo), in, out, sampler, cfg, trng, processed,
                            total_pairs);
        }
      });
    }
    result.epoch_losses.push_back(monitor_loss());
  }

  result.embedding.vectors.resize(static_cast<Eigen::Index>(num_nodes),
                                  static_cast<Eigen::Index>(cfg.dim));
  for (std::size_t v = 0; v < num_nodes; ++v)
    for (std::size_t k = 0; k < cfg.dim; ++k)
      result.embedding.vectors(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) =
          in.data[v * cfg.dim + k];
  return result;
}

EmbeddingMatrix random_embedding(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix e;
  e.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < e.vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) e.vectors(r, c) = rng.normal();
  return e;
}

void store_embedding(const std::filesystem::path& path, const EmbeddingMatrix& e,
                     const Vocabulary& vocab) {
  if (!e.finite()) throw std::invalid_argument("store_embedding: non-finite entries");
  if (e.rows() != vocab.size())
    throw std::invalid_argument("store_embedding: row count does not match vocabulary");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << e.rows() << ' ' << e.dim() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < e.rows(); ++r) {
    os << vocab.item(static_cast<NodeId>(r));
    for (std::size_t c = 0; c < e.dim(); ++c) {
      std::snprintf(buf, sizeof buf, " %.17g",
                    e.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingMatrix load_embedding(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open embedding file " + path.string());
  const std::string where = path.string() + ":";

  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(where + "1: missing header");
  auto header = split_ws(line);
  std::size_t rows = 0, dim = 0;
  if (header.size() != 2 || !parse_number(header[0], rows) || !parse_number(header[1], dim) ||
      dim == 0)
    throw std::runtime_error(where + "1: header must be '<rows> <dim>'");
  if (rows != vocab.size())
    throw std::runtime_error(where + "1: dimension mismatch: file has " + std::to_string(rows) +
                             " rows, vocabulary has " + std::to_string(vocab.size()));

  EmbeddingMatrix e;
  e.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::vector<bool> seen(rows, false);
  std::size_t lineno = 1, parsed = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    const std::string at = where + std::to_string(lineno) + ": ";
    if (fields.size() != dim + 1)
      throw std::runtime_error(at + "expected " + std::to_string(dim + 1) + " columns, got " +
                               std::to_string(fields.size()));
    auto idx = vocab.find(std::string(fields[0]));
    if (!idx) throw std::runtime_error(at + "unknown item-id '" + std::string(fields[0]) + "'");
    if (seen[*idx]) throw std::runtime_error(at + "duplicate item-id '" + std::string(fields[0]) + "'");
    seen[*idx] = true;
    for (std::size_t c = 0; c < dim; ++c) {
      double v;
      if (!parse_number(fields[c + 1], v) || !std::isfinite(v))
        throw std::runtime_error(at + "bad value in column " + std::to_string(c + 2));
      e.vectors(static_cast<Eigen::Index>(*idx), static_cast<Eigen::Index>(c)) = v;
    }
    ++parsed;
  }
  if (parsed != rows) {
    for (std::size_t r = 0; r < rows; ++r)
      if (!seen[r])
        throw std::runtime_error(where + " missing row for item-id '" +
                                 vocab.item(static_cast<NodeId>(r)) + "'");
  }
  return e;
}

void store_walks(const std::filesystem::path& path, const WalkCorpus& corpus) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& w : corpus.walks) {
    for (std::size_t i = 0; i < w.size(); ++i) os << (i ? " " : "") << w[i];
    os << '\n';
  }
}

}  // namespace nprox
