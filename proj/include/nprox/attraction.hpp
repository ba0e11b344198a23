#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nprox/embed.hpp"
#include "nprox/proximity.hpp"

namespace nprox {

// All-pairs cosine distances (1 - cos) of an embedding.
class DistanceIndex {
 public:
  std::size_t size() const { return n_; }
  double at(NodeId t, NodeId v) const { return dist_[static_cast<std::size_t>(t) * n_ + v]; }
  std::span<const double> row(NodeId t) const {
    return {dist_.data() + static_cast<std::size_t>(t) * n_, n_};
  }
  // Over pairs t != v.
  double min() const { return min_; }
  double max() const { return max_; }

  // Ascending (distance, node) over all v != t.
  std::vector<std::pair<double, NodeId>> sorted_neighbors(NodeId t) const;

  friend DistanceIndex build_distance_index(const EmbeddingMatrix& e, std::size_t threads);

 private:
  std::size_t n_ = 0;
  std::vector<double> dist_;
  double min_ = 0.0;
  double max_ = 0.0;
};

// Throws std::invalid_argument("degenerate embedding row <i>") for zero rows.
DistanceIndex build_distance_index(const EmbeddingMatrix& e, std::size_t threads = 1);

struct WindowSeries {
  std::vector<double> w;  // |V| + 1 ascending windows
  double stride = 0.0;
};

WindowSeries window_series(const DistanceIndex& idx);

// Proportion of `cell` strictly closer to t than each window. The last window
// is closed (<=), so the final entry is always 1.
std::vector<double> hit_curve(const DistanceIndex& idx, NodeId t, std::span<const NodeId> cell,
                              const WindowSeries& w);

// x_i = -6 + 12 i / (h.size() - 1).
std::vector<double> hit_curve_abscissa(std::size_t samples);

struct SigmoidFit {
  double g = 1.0;
  double s = 0.0;
  double residual = 0.0;  // RMSE
  bool converged = false;
  std::size_t iterations = 0;
};

inline constexpr double kMinGrowth = 1e-6;
inline constexpr double kMaxGrowth = 1e6;
inline constexpr std::size_t kMaxFitIterations = 500;

double sigmoid_curve(double g, double s, double x);

// Levenberg-Marquardt least squares of 1 / (1 + exp(-g (x - s))) against h
// over x in [-6, 6], starting from g = 1, s = 0, with g kept in
// [kMinGrowth, kMaxGrowth].
SigmoidFit fit_sigmoid(std::span<const double> h);

// Closed-form integral of the sigmoid over [-6, 6].
double delta_integral(double g, double s);
inline double delta_integral(const SigmoidFit& fit) { return delta_integral(fit.g, fit.s); }

// Mean over targets of the full-set (V \ {t}) hit curve.
std::vector<double> null_hit_curve(const DistanceIndex& idx, const WindowSeries& w);

struct NullModel {
  SigmoidFit fit;
  double delta = 0.0;
};

// Throws std::runtime_error when the null fit does not converge.
NullModel null_model(const DistanceIndex& idx, const WindowSeries& w);
double null_delta(const DistanceIndex& idx, const WindowSeries& w);

// log2(delta / null); both must be positive.
double normalize_delta(double delta, double null);

struct AttractionRecord {
  NodeId target = 0;
  std::optional<Network> network;  // empty for the W0 control
  std::uint8_t weight_class = 0;   // 0 for W0, else 1..4
  std::size_t size = 0;
  SigmoidFit fit;
  double delta = 0.0;
  double delta_dot = 0.0;
  bool valid = false;
};

struct AttractionOptions {
  std::size_t w0_cap = 5000;
  bool exact_w0 = false;
  double min_cell_fraction = 0.005;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct CellCurve {
  std::vector<double> mean_hit;  // averaged over valid records
  std::size_t valid = 0;
};

struct AttractionResult {
  std::vector<AttractionRecord> records;  // target-major, cell order
  NullModel null;
  std::array<CellCurve, kPartitionCells> curves;
};

AttractionResult compute_attraction(const DistanceIndex& idx, const ProximityStack& stack,
                                    const AttractionOptions& opts = {});

}  // namespace nprox
