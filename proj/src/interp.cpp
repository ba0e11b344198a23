#include "nprox/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nprox {

std::array<std::optional<double>, kScoreClasses> ClassScoreSets::class_means() const {
  std::array<std::optional<double>, kScoreClasses> out;
  for (std::size_t c = 0; c < kScoreClasses; ++c) {
    if (scores[c].empty()) continue;
    out[c] = std::accumulate(scores[c].begin(), scores[c].end(), 0.0) /
             static_cast<double>(scores[c].size());
  }
  return out;
}

namespace {

struct MeanSpread {
  double mean = 0.0;
  double sigma = 0.0;
  std::size_t count = 0;
};

MeanSpread spread_of_means(const ClassScoreSets& sets) {
  MeanSpread ms;
  const auto means = sets.class_means();
  for (const auto& m : means)
    if (m) {
      ms.mean += *m;
      ++ms.count;
    }
  if (ms.count == 0) return ms;
  ms.mean /= static_cast<double>(ms.count);
  double var = 0.0;
  for (const auto& m : means)
    if (m) var += (*m - ms.mean) * (*m - ms.mean);
  ms.sigma = std::sqrt(var / static_cast<double>(ms.count));
  return ms;
}

}  // namespace

double ClassScoreSets::sigma_of_means() const { return spread_of_means(*this).sigma; }

ClassScoreSets collect_scores(std::span<const AttractionRecord> records, Network network) {
  ClassScoreSets sets;
  for (const auto& r : records) {
    if (!r.valid) continue;
    if (!r.network) sets.scores[0].push_back(r.delta_dot);
    else if (*r.network == network) sets.scores[r.weight_class].push_back(r.delta_dot);
  }
  return sets;
}

ClassScoreSets znormalize(const ClassScoreSets& sets) {
  const auto ms = spread_of_means(sets);
  if (ms.count < 2) throw std::invalid_argument("znormalize: fewer than 2 non-empty classes");
  if (!(ms.sigma > 0.0)) throw std::invalid_argument("indistinguishable classes");
  ClassScoreSets z;
  for (std::size_t c = 0; c < kScoreClasses; ++c) {
    z.scores[c].reserve(sets.scores[c].size());
    for (double x : sets.scores[c]) z.scores[c].push_back((x - ms.mean) / ms.sigma);
  }
  return z;
}

Histogram build_histogram(std::span<const double> z) {
  if (z.empty()) throw std::invalid_argument("build_histogram: empty sample");
  Histogram h{};
  for (double v : z) {
    const double pos = std::floor((v + kHistogramHalfRange) / kHistogramBinWidth);
    std::size_t bin;
    if (!(pos >= 0.0)) bin = 0;  // also catches NaN
    else if (pos >= static_cast<double>(kHistogramBins)) bin = kHistogramBins - 1;
    else bin = static_cast<std::size_t>(pos);
    h[bin] += 1.0;
  }
  for (auto& p : h) p /= static_cast<double>(z.size());
  return h;
}

std::array<Histogram, kScoreClasses> build_histograms(const ClassScoreSets& z) {
  std::array<Histogram, kScoreClasses> out;
  for (std::size_t c = 0; c < kScoreClasses; ++c) {
    if (z.scores[c].empty())
      throw std::invalid_argument("build_histograms: empty class W" + std::to_string(c));
    out[c] = build_histogram(z.scores[c]);
  }
  return out;
}

double js_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("js_distance: grid mismatch");
  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_p += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log2(q[i] / m);
  }
  const double jsd = 0.5 * (kl_p + kl_q);
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

std::array<double, kClassPairs> pairwise_js(const std::array<Histogram, kScoreClasses>& hists) {
  std::array<double, kClassPairs> out{};
  const auto pairs = class_pairs();
  for (std::size_t k = 0; k < kClassPairs; ++k)
    out[k] = js_distance(hists[pairs[k].first], hists[pairs[k].second]);
  return out;
}

double interpretability_I(const std::array<Histogram, kScoreClasses>& hists) {
  const auto js = pairwise_js(hists);
  return std::accumulate(js.begin(), js.end(), 0.0) / static_cast<double>(kClassPairs);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form; converges fast for small lambda.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::pow(y, (2 * k - 1) * (2 * k - 1));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double en = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
  r.approximate = en < 4.0;
  return r;
}

KsMatrix ks_matrix(const ClassScoreSets& z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_matrix: alpha must lie in (0, 1)");
  for (std::size_t c = 0; c < kScoreClasses; ++c)
    if (z.scores[c].size() < 2)
      throw std::invalid_argument("ks_matrix: class W" + std::to_string(c) +
                                  " needs at least 2 samples");
  KsMatrix m;
  const auto pairs = class_pairs();
  const double threshold = alpha / static_cast<double>(kClassPairs);
  m.starred = true;
  for (std::size_t k = 0; k < kClassPairs; ++k) {
    m.pairs[k] = ks_two_sample(z.scores[pairs[k].first], z.scores[pairs[k].second]);
    m.pairs[k].significant = m.pairs[k].p_value < threshold;
    m.starred = m.starred && m.pairs[k].significant;
  }
  return m;
}

NetworkReport interpret_network(std::span<const AttractionRecord> records, Network network,
                                double alpha) {
  NetworkReport rep;
  rep.network = network;
  const auto raw = collect_scores(records, network);
  const auto means = raw.class_means();
  for (std::size_t c = 0; c < kScoreClasses; ++c) {
    rep.class_sizes[c] = raw.scores[c].size();
    if (!means[c]) continue;
    rep.class_means[c] = *means[c];
    double var = 0.0;
    for (double x : raw.scores[c]) var += (x - *means[c]) * (x - *means[c]);
    rep.class_stds[c] = std::sqrt(var / static_cast<double>(raw.scores[c].size()));
  }
  rep.sigma_of_means = raw.sigma_of_means();

  for (std::size_t c = 0; c < kScoreClasses; ++c)
    if (raw.scores[c].size() < 2) {
      rep.reason = "class W" + std::to_string(c) + " has fewer than 2 valid records";
      return rep;
    }
  ClassScoreSets z;
  try {
    z = znormalize(raw);
  } catch (const std::invalid_argument& e) {
    rep.reason = e.what();
    return rep;
  }
  rep.histograms = build_histograms(z);
  rep.js = pairwise_js(rep.histograms);
  rep.I = std::accumulate(rep.js.begin(), rep.js.end(), 0.0) / static_cast<double>(kClassPairs);
  double var = 0.0;
  for (double v : rep.js) var += (v - rep.I) * (v - rep.I);
  rep.js_std = std::sqrt(var / static_cast<double>(kClassPairs));
  rep.ks = ks_matrix(z, alpha);
  rep.available = true;
  return rep;
}

InterpretabilityReport interpret(const std::string& model, const AttractionResult& attraction,
                                 double alpha) {
  InterpretabilityReport rep;
  rep.model = model;
  rep.null_delta = attraction.null.delta;
  for (Network net : kNetworks)
    rep.networks[static_cast<std::size_t>(net)] = interpret_network(attraction.records, net, alpha);
  return rep;
}

std::vector<RankEntry> rank_models(std::span<const InterpretabilityReport> reports) {
  if (reports.size() < 2) throw std::invalid_argument("rank_models: need at least 2 reports");
  std::array<bool, 3> shared{};
  for (std::size_t n = 0; n < 3; ++n)
    shared[n] = std::all_of(reports.begin(), reports.end(),
                            [n](const auto& r) { return r.networks[n].available; });
  if (std::none_of(shared.begin(), shared.end(), [](bool b) { return b; }))
    throw std::invalid_argument("rank_models: no network is available in every report");

  std::vector<RankEntry> out(reports.size());
  for (std::size_t r = 0; r < reports.size(); ++r) out[r].model = reports[r].model;
  std::size_t used = 0;
  for (std::size_t n = 0; n < 3; ++n) {
    if (!shared[n]) continue;
    ++used;
    for (std::size_t r = 0; r < reports.size(); ++r) {
      const double mine = reports[r].networks[n].I;
      std::size_t better = 0;
      for (const auto& other : reports)
        if (other.networks[n].I > mine) ++better;
      out[r].ranks[n] = better + 1;
      out[r].mean_rank += static_cast<double>(better + 1);
      out[r].mean_I += mine;
    }
  }
  for (auto& e : out) {
    e.mean_rank /= static_cast<double>(used);
    e.mean_I /= static_cast<double>(used);
  }
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
    if (a.mean_I != b.mean_I) return a.mean_I > b.mean_I;
    return a.model < b.model;
  });
  return out;
}

}  // namespace nprox
