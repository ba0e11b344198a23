#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nprox/sparse_matrix.hpp"

namespace nprox {

struct Event {
  std::string owner;
  double timestamp = 0.0;
  std::string item;
  std::optional<double> duration;
};

using EventLog = std::vector<Event>;

enum class CorpusKind { session, playlist };

struct Group {
  std::string owner;
  std::vector<std::string> items;
};

struct GroupedCorpus {
  std::vector<Group> groups;
  CorpusKind kind = CorpusKind::session;
};

// Bidirectional item-id <-> dense index map. Indices follow lexicographic
// item-id order so the mapping does not depend on input ordering.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> items);

  std::size_t size() const { return items_.size(); }
  const std::string& item(NodeId i) const { return items_[i]; }
  const std::vector<std::string>& items() const { return items_; }
  std::optional<NodeId> find(const std::string& item) const;
  NodeId index(const std::string& item) const;  // throws std::out_of_range

  // Vocabulary restricted to `kept` indices, renumbered in order.
  Vocabulary subset(const std::vector<NodeId>& kept) const;

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, NodeId> index_;
};

struct CooccurrenceCounts {
  SparseSymmetricMatrix matrix;
  Vocabulary vocab;
};

struct SessionizeResult {
  GroupedCorpus corpus;
  // Number of records that lacked a duration while skip filtering was on.
  std::size_t missing_durations = 0;
};

// Splits each owner's time-ordered stream into groups wherever consecutive
// records are more than `gap` apart. Records shorter than `skip_threshold`
// are removed first; records without a duration are kept. Groups are
// deduplicated and those with fewer than two distinct items are dropped.
SessionizeResult sessionize_with_report(const EventLog& log, double gap,
                                        double skip_threshold);
GroupedCorpus sessionize(const EventLog& log, double gap, double skip_threshold);

// Drops playlists longer than `length_sigma_mult` population standard
// deviations of the raw lengths, then those with fewer than `min_unique`
// distinct items. Survivors are deduplicated.
GroupedCorpus clean_playlists(const GroupedCorpus& playlists, std::size_t min_unique,
                              double length_sigma_mult);

// Removes owners with `min_groups` or fewer groups.
GroupedCorpus filter_active_owners(const GroupedCorpus& corpus, std::size_t min_groups);

// Order-preserving removal of repeated items within each group.
GroupedCorpus deduplicate(const GroupedCorpus& corpus);

// Counts unordered item pairs per group. Pairs whose raw count summed over all
// owners is below `min_count` are zeroed first; then, with
// `per_owner_normalize`, each owner's contribution is divided by that owner's
// group count.
CooccurrenceCounts build_cooccurrence(const GroupedCorpus& corpus,
                                      bool per_owner_normalize,
                                      std::size_t min_count);

struct SynthParams {
  std::size_t communities = 4;
  std::size_t nodes_per_community = 125;
  std::size_t groups = 20000;
  double intra_prob = 0.9;
  std::size_t min_group_size = 4;
  std::size_t max_group_size = 12;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  GroupedCorpus corpus;
  // Ground-truth community of every generated item.
  std::unordered_map<std::string, std::uint32_t> community;
  std::vector<std::uint32_t> group_home;
};

// Planted-community corpus. Each group picks a home community; each item slot
// is drawn from the home community with probability `intra_prob`, else from
// the nodes outside it.
SynthCorpus synth_corpus(const SynthParams& params);

std::string synth_item_id(std::size_t node);

}  // namespace nprox
