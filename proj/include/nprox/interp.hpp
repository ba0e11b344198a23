#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nprox/attraction.hpp"
#include "nprox/proximity.hpp"

namespace nprox {

inline constexpr std::size_t kScoreClasses = 5;  // W0..W4
inline constexpr std::size_t kClassPairs = 10;   // C(5, 2)
inline constexpr std::size_t kHistogramBins = 80;
inline constexpr double kHistogramHalfRange = 10.0;  // in z units
inline constexpr double kHistogramBinWidth = 0.25;

// Valid delta-dot samples of one proximity network, indexed by class:
// [0] is the W0 control, [j] class j of the network.
struct ClassScoreSets {
  std::array<std::vector<double>, kScoreClasses> scores;

  std::array<std::optional<double>, kScoreClasses> class_means() const;
  // Population standard deviation of the non-empty class means.
  double sigma_of_means() const;
};

ClassScoreSets collect_scores(std::span<const AttractionRecord> records, Network network);

// (x - <mu>) / sigma_mu over all samples. Throws when fewer than two classes
// are non-empty or when sigma_mu is zero ("indistinguishable classes").
ClassScoreSets znormalize(const ClassScoreSets& sets);

using Histogram = std::array<double, kHistogramBins>;

// Fixed z-grid [-10, 10) with width 1/4; out-of-range values go to the
// terminal bins. Probabilities sum to one.
Histogram build_histogram(std::span<const double> z);
std::array<Histogram, kScoreClasses> build_histograms(const ClassScoreSets& z);

// sqrt(0.5 (KL(p||m) + KL(q||m))) with base-2 logarithms.
double js_distance(std::span<const double> p, std::span<const double> q);

// Unordered class pairs (i < j) in lexicographic order.
constexpr std::array<std::pair<std::size_t, std::size_t>, kClassPairs> class_pairs() {
  std::array<std::pair<std::size_t, std::size_t>, kClassPairs> out{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < kScoreClasses; ++i)
    for (std::size_t j = i + 1; j < kScoreClasses; ++j) out[k++] = {i, j};
  return out;
}

std::array<double, kClassPairs> pairwise_js(const std::array<Histogram, kScoreClasses>& hists);
double interpretability_I(const std::array<Histogram, kScoreClasses>& hists);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
  bool approximate = false;
};

// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
// (effective-size corrected). `approximate` is set for effective sizes < 4.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsMatrix {
  std::array<KsResult, kClassPairs> pairs;
  bool starred = false;  // every pair significant after Bonferroni
};

// Significant iff p < alpha / 10. Each class needs at least two samples.
KsMatrix ks_matrix(const ClassScoreSets& z, double alpha);

struct NetworkReport {
  Network network = Network::S;
  bool available = false;
  std::string reason;  // why I is unavailable
  double I = 0.0;
  double js_std = 0.0;  // population std of the 10 pairwise JS values
  std::array<double, kClassPairs> js{};
  KsMatrix ks;
  std::array<std::size_t, kScoreClasses> class_sizes{};
  std::array<double, kScoreClasses> class_means{};  // raw delta-dot
  std::array<double, kScoreClasses> class_stds{};
  double sigma_of_means = 0.0;
  std::array<Histogram, kScoreClasses> histograms{};
};

struct InterpretabilityReport {
  std::string model;
  double null_delta = 0.0;
  std::array<NetworkReport, 3> networks;
};

// Never throws for unusable networks; they are reported unavailable with the
// reason.
NetworkReport interpret_network(std::span<const AttractionRecord> records, Network network,
                                double alpha);
InterpretabilityReport interpret(const std::string& model, const AttractionResult& attraction,
                                 double alpha);

struct RankEntry {
  std::string model;
  std::array<std::optional<std::size_t>, 3> ranks;  // per network, 1 = best
  double mean_rank = 0.0;
  double mean_I = 0.0;
};

// Per network, competition ranking by I descending over networks available
// in every report; ordered by mean rank, then mean I descending, then name.
std::vector<RankEntry> rank_models(std::span<const InterpretabilityReport> reports);

}  // namespace nprox
