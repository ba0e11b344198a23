#include "nprox/attraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nprox/parallel.hpp"
#include "nprox/random.hpp"

namespace nprox {

DistanceIndex build_distance_index(const EmbeddingMatrix& e, std::size_t threads) {
  const auto n = e.rows();
  if (n < 2) throw std::invalid_argument("build_distance_index: need at least two nodes");
  if (!e.finite()) throw std::invalid_argument("build_distance_index: non-finite embedding");

  Eigen::MatrixXd unit = e.vectors;
  for (Eigen::Index r = 0; r < unit.rows(); ++r) {
    const double norm = unit.row(r).norm();
    if (norm == 0.0)
      throw std::invalid_argument("degenerate embedding row " + std::to_string(r));
    unit.row(r) /= norm;
  }

  DistanceIndex idx;
  idx.n_ = n;
  idx.dist_.assign(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      for (std::size_t v = 0; v < n; ++v) {
        if (v == t) continue;
        const double c = unit.row(ti).dot(unit.row(static_cast<Eigen::Index>(v)));
        idx.dist_[t * n + v] = std::clamp(1.0 - c, 0.0, 2.0);
      }
    }
  });
  idx.min_ = std::numeric_limits<double>::infinity();
  idx.max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t v = t + 1; v < n; ++v) {
      idx.min_ = std::min(idx.min_, idx.dist_[t * n + v]);
      idx.max_ = std::max(idx.max_, idx.dist_[t * n + v]);
    }
  return idx;
}

std::vector<std::pair<double, NodeId>> DistanceIndex::sorted_neighbors(NodeId t) const {
  std::vector<std::pair<double, NodeId>> out;
  out.reserve(n_ - 1);
  for (NodeId v = 0; v < n_; ++v)
    if (v != t) out.emplace_back(at(t, v), v);
  std::sort(out.begin(), out.end());
  return out;
}

WindowSeries window_series(const DistanceIndex& idx) {
  if (!(idx.max() > idx.min()))
    throw std::invalid_argument("degenerate distance distribution");
  const auto n = idx.size();
  WindowSeries ws;
  ws.stride = (idx.max() - idx.min()) / static_cast<double>(n);
  ws.w.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    ws.w[i] = idx.min() + static_cast<double>(i) * (idx.max() - idx.min()) / static_cast<double>(n);
  ws.w[n] = idx.max();
  return ws;
}

namespace {

// Smallest i with d < w[i]; w.size() when no window strictly contains d.
std::size_t first_window(const WindowSeries& ws, double d) {
  const auto last = ws.w.size() - 1;
  auto i = static_cast<std::size_t>(std::clamp(std::floor((d - ws.w[0]) / ws.stride) + 1.0, 0.0,
                                               static_cast<double>(last + 1)));
  while (i > 0 && d < ws.w[i - 1]) --i;
  while (i <= last && !(d < ws.w[i])) ++i;
  return i;
}

// Accumulates first-window counts into `buckets` (size |V| + 2).
void bucket_distances(const WindowSeries& ws, std::span<const double> row,
                      std::span<const NodeId> cell, std::vector<double>& buckets) {
  for (NodeId v : cell) buckets[first_window(ws, row[v])] += 1.0;
}

std::vector<double> cumulate(const std::vector<double>& buckets, double total) {
  const auto samples = buckets.size() - 1;
  std::vector<double> h(samples);
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    acc += buckets[i];
    h[i] = acc / total;
  }
  h[samples - 1] = 1.0;
  return h;
}

}  // namespace

std::vector<double> hit_curve(const DistanceIndex& idx, NodeId t, std::span<const NodeId> cell,
                              const WindowSeries& w) {
  if (cell.empty()) throw std::invalid_argument("hit_curve: empty cell");
  if (w.w.size() != idx.size() + 1) throw std::invalid_argument("hit_curve: window size mismatch");
  std::vector<double> buckets(w.w.size() + 1, 0.0);
  bucket_distances(w, idx.row(t), cell, buckets);
  return cumulate(buckets, static_cast<double>(cell.size()));
}

std::vector<double> hit_curve_abscissa(std::size_t samples) {
  std::vector<double> x(samples);
  const double span = static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) x[i] = -6.0 + 12.0 * static_cast<double>(i) / span;
  return x;
}

double sigmoid_curve(double g, double s, double x) {
  const double z = g * (x - s);
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// Levenberg-Marquardt on the squared residual, started from (g0, s0).
SigmoidFit levenberg_marquardt(std::span<const double> h, std::span<const double> x, double g0,
                               double s0, double& loss) {
  auto loss_at = [&](double g, double s) {
    double l = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double r = sigmoid_curve(g, s, x[i]) - h[i];
      l += r * r;
    }
    return l;
  };

  SigmoidFit fit;
  fit.g = g0;
  fit.s = s0;
  loss = loss_at(fit.g, fit.s);
  // Fits this close to the data have nothing left to resolve.
  const double negligible = std::max(1e-30, 1e-18 * static_cast<double>(h.size()));
  double lambda = 1e-3;
  for (fit.iterations = 1; fit.iterations <= kMaxFitIterations; ++fit.iterations) {
    if (loss < negligible) {
      fit.converged = true;
      break;
    }
    // Normal equations of the 2-parameter problem.
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double f = sigmoid_curve(fit.g, fit.s, x[i]);
      const double df = f * (1.0 - f);
      const double jg = df * (x[i] - fit.s);
      const double js = -fit.g * df;
      const double r = f - h[i];
      a11 += jg * jg;
      a12 += jg * js;
      a22 += js * js;
      b1 -= jg * r;
      b2 -= js * r;
    }
    bool accepted = false;
    while (!accepted && lambda < 1e20) {
      const double d11 = a11 + lambda * std::max(a11, 1e-300);
      const double d22 = a22 + lambda * std::max(a22, 1e-300);
      const double det = d11 * d22 - a12 * a12;
      if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        lambda *= 10.0;
        continue;
      }
      const double step_g = (b1 * d22 - a12 * b2) / det;
      const double step_s = (d11 * b2 - a12 * b1) / det;
      const double g = std::clamp(fit.g + step_g, kMinGrowth, kMaxGrowth);
      const double s = fit.s + step_s;
      const double trial = loss_at(g, s);
      if (std::isfinite(trial) && trial < loss) {
        const double rel = (loss - trial) / loss;
        fit.g = g;
        fit.s = s;
        loss = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel < 1e-10) fit.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    // No descent direction left at any damping: stationary point.
    if (!accepted) fit.converged = true;
    if (fit.converged) break;
  }
  fit.iterations = std::min(fit.iterations, kMaxFitIterations);
  fit.residual = std::sqrt(loss / static_cast<double>(h.size()));
  return fit;
}

// x where the piecewise-linear curve first reaches `level`.
double crossing(std::span<const double> h, std::span<const double> x, double level) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] >= level) {
      const double rise = h[i] - h[i - 1];
      const double frac = rise > 0 ? std::clamp((level - h[i - 1]) / rise, 0.0, 1.0) : 1.0;
      return x[i - 1] + frac * (x[i] - x[i - 1]);
    }
  return x.back();
}

}  // namespace

SigmoidFit fit_sigmoid(std::span<const double> h) {
  if (h.size() < 3) throw std::invalid_argument("fit_sigmoid: need at least 3 samples");
  const auto x = hit_curve_abscissa(h.size());

  double loss = 0.0;
  auto fit = levenberg_marquardt(h, x, 1.0, 0.0, loss);
  if (fit.converged && fit.residual < 1e-9) return fit;

  // Second start read off the curve: centre at the 0.5 crossing, growth from
  // the 0.25..0.75 rise. Curves that jump near the window edges otherwise
  // slide into the flat g -> 0, s -> inf valley from (1, 0).
  const double lo = crossing(h, x, 0.25), hi = crossing(h, x, 0.75);
  const double stride = 12.0 / static_cast<double>(h.size() - 1);
  const double g0 = std::clamp(2.0 * std::log(3.0) / std::max(hi - lo, stride / 2.0), kMinGrowth, kMaxGrowth);
  double alt_loss = 0.0;
  auto alt = levenberg_marquardt(h, x, g0, crossing(h, x, 0.5), alt_loss);
  if (alt.converged == fit.converged ? alt_loss < loss : alt.converged) fit = alt;
  return fit;
}

namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

}  // namespace

double delta_integral(double g, double s) {
  if (g == 0.0) return 6.0;
  const double a = 6.0 - s;
  const double b = -6.0 - s;
  const double scale = std::abs(g) * std::max(std::abs(a), std::abs(b));
  if (scale < 1e-3) {
    // Series of (softplus(g a) - softplus(g b)) / g around g = 0.
    const double a2 = a * a, b2 = b * b;
    return (a - b) / 2.0 + g * (a2 - b2) / 8.0 - g * g * g * (a2 * a2 - b2 * b2) / 192.0;
  }
  return (softplus(g * a) - softplus(g * b)) / g;
}

std::vector<double> null_hit_curve(const DistanceIndex& idx, const WindowSeries& w) {
  const auto n = idx.size();
  std::vector<double> buckets(w.w.size() + 1, 0.0);
  for (NodeId t = 0; t < n; ++t) {
    const auto row = idx.row(t);
    for (NodeId v = 0; v < n; ++v)
      if (v != t) buckets[first_window(w, row[v])] += 1.0;
  }
  // Every target has |V| - 1 candidates, so the mean of the per-target
  // proportions equals the pooled proportion.
  return cumulate(buckets, static_cast<double>(n) * static_cast<double>(n - 1));
}

NullModel null_model(const DistanceIndex& idx, const WindowSeries& w) {
  NullModel nm;
  nm.fit = fit_sigmoid(null_hit_curve(idx, w));
  if (!nm.fit.converged) throw std::runtime_error("null model sigmoid fit did not converge");
  nm.delta = delta_integral(nm.fit);
  return nm;
}

double null_delta(const DistanceIndex& idx, const WindowSeries& w) {
  return null_model(idx, w).delta;
}

double normalize_delta(double delta, double null) {
  if (!(delta > 0.0) || !(null > 0.0))
    throw std::invalid_argument("normalize_delta: inputs must be positive");
  return std::log2(delta / null);
}

namespace {

constexpr std::size_t kTargetBlock = 64;

// Uniform sample of `cap` members without replacement.
std::vector<NodeId> sample_cell(const std::vector<NodeId>& cell, std::size_t cap, Rng& rng) {
  std::vector<NodeId> pool = cell;
  for (std::size_t i = 0; i < cap; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(cap);
  return pool;
}

}  // namespace

AttractionResult compute_attraction(const DistanceIndex& idx, const ProximityStack& stack,
                                    const AttractionOptions& opts) {
  const auto n = idx.size();
  if (stack.dimension() != n)
    throw std::invalid_argument("compute_attraction: embedding has " + std::to_string(n) +
                                " rows but the proximity stack has " +
                                std::to_string(stack.dimension()) + " nodes");
  const auto ws = window_series(idx);

  AttractionResult result;
  result.null = null_model(idx, ws);
  result.records.resize(n * kPartitionCells);
  const double min_size = opts.min_cell_fraction * static_cast<double>(n);

  const std::size_t blocks = (n + kTargetBlock - 1) / kTargetBlock;
  std::vector<std::array<std::vector<double>, kPartitionCells>> block_sums(blocks);
  std::vector<std::array<std::size_t, kPartitionCells>> block_counts(blocks);

  parallel_for(blocks, opts.threads, [&](std::size_t bb, std::size_t be) {
    for (std::size_t b = bb; b < be; ++b) {
      auto& sums = block_sums[b];
      auto& counts = block_counts[b];
      counts.fill(0);
      for (auto& s : sums) s.assign(n + 1, 0.0);
      for (std::size_t ti = b * kTargetBlock; ti < std::min(n, (b + 1) * kTargetBlock); ++ti) {
        const auto t = static_cast<NodeId>(ti);
        const auto part = neighborhood_partition(stack, t);
        for (std::size_t c = 0; c < kPartitionCells; ++c) {
          auto& rec = result.records[ti * kPartitionCells + c];
          rec.target = t;
          if (c == 0) {
            rec.network.reset();
            rec.weight_class = 0;
          } else {
            rec.network = static_cast<Network>((c - 1) / kWeightClasses);
            rec.weight_class = static_cast<std::uint8_t>((c - 1) % kWeightClasses + 1);
          }
          const auto& cell = part.cells[c];
          rec.size = cell.size();
          rec.delta = rec.delta_dot = std::numeric_limits<double>::quiet_NaN();
          rec.fit = SigmoidFit{};
          rec.fit.g = rec.fit.s = rec.fit.residual = std::numeric_limits<double>::quiet_NaN();
          if (!(static_cast<double>(cell.size()) > min_size) || cell.empty()) continue;

          std::vector<double> h;
          if (c == 0 && !opts.exact_w0 && cell.size() > opts.w0_cap) {
            Rng rng(derive_seed(opts.seed, t));
            h = hit_curve(idx, t, sample_cell(cell, opts.w0_cap, rng), ws);
          } else {
            h = hit_curve(idx, t, cell, ws);
          }
          rec.fit = fit_sigmoid(h);
          if (!rec.fit.converged) continue;
          rec.delta = delta_integral(rec.fit);
          // Underflowed areas cannot be normalized.
          if (!(rec.delta > 0.0)) continue;
          rec.delta_dot = normalize_delta(rec.delta, result.null.delta);
          rec.valid = true;
          ++counts[c];
          for (std::size_t i = 0; i <= n; ++i) sums[c][i] += h[i];
        }
      }
    }
  });

  for (std::size_t c = 0; c < kPartitionCells; ++c) {
    auto& curve = result.curves[c];
    curve.mean_hit.assign(n + 1, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
      curve.valid += block_counts[b][c];
      for (std::size_t i = 0; i <= n; ++i) curve.mean_hit[i] += block_sums[b][c][i];
    }
    if (curve.valid > 0)
      for (auto& v : curve.mean_hit) v /= static_cast<double>(curve.valid);
  }
  return result;
}

}  // namespace nprox
