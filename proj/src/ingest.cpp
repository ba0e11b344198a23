#include "nprox/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "nprox/random.hpp"

namespace nprox {

Vocabulary::Vocabulary(std::vector<std::string> items) : items_(std::move(items)) {
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i], static_cast<NodeId>(i)).second)
      throw std::invalid_argument("duplicate vocabulary item: " + items_[i]);
  }
}

std::optional<NodeId> Vocabulary::find(const std::string& item) const {
  auto it = index_.find(item);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId Vocabulary::index(const std::string& item) const {
  auto it = index_.find(item);
  if (it == index_.end()) throw std::out_of_range("unknown item-id: " + item);
  return it->second;
}

Vocabulary Vocabulary::subset(const std::vector<NodeId>& kept) const {
  std::vector<std::string> items;
  items.reserve(kept.size());
  for (NodeId k : kept) items.push_back(items_.at(k));
  return Vocabulary(std::move(items));
}

namespace {

std::vector<std::string> unique_items(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& it : items)
    if (seen.insert(it).second) out.push_back(it);
  return out;
}

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

GroupedCorpus deduplicate(const GroupedCorpus& corpus) {
  GroupedCorpus out{{}, corpus.kind};
  out.groups.reserve(corpus.groups.size());
  for (const auto& g : corpus.groups) out.groups.push_back({g.owner, unique_items(g.items)});
  return out;
}

SessionizeResult sessionize_with_report(const EventLog& log, double gap,
                                        double skip_threshold) {
  if (!(gap > 0.0)) throw std::invalid_argument("sessionize: gap must be > 0");
  if (!(skip_threshold >= 0.0))
    throw std::invalid_argument("sessionize: skip_threshold must be >= 0");

  SessionizeResult result;
  result.corpus.kind = CorpusKind::session;

  std::vector<const Event*> kept;
  kept.reserve(log.size());
  for (const auto& e : log) {
    if (e.item.empty()) throw std::invalid_argument("sessionize: empty item-id");
    if (e.duration && *e.duration < 0.0)
      throw std::invalid_argument("sessionize: negative duration for item " + e.item);
    if (skip_threshold > 0.0) {
      if (!e.duration)
        ++result.missing_durations;
      else if (*e.duration < skip_threshold)
        continue;
    }
    kept.push_back(&e);
  }
  // Full lexicographic key so the result is independent of input order.
  std::sort(kept.begin(), kept.end(), [](const Event* a, const Event* b) {
    if (a->owner != b->owner) return a->owner < b->owner;
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    if (a->item != b->item) return a->item < b->item;
    return a->duration.value_or(-1.0) < b->duration.value_or(-1.0);
  });

  auto flush = [&](Group& g) {
    g.items = unique_items(g.items);
    if (g.items.size() >= 2) result.corpus.groups.push_back(std::move(g));
    g = Group{};
  };

  Group current;
  const Event* prev = nullptr;
  for (const Event* e : kept) {
    bool boundary = prev == nullptr || prev->owner != e->owner ||
                    e->timestamp - prev->timestamp > gap;
    if (boundary && prev != nullptr) flush(current);
    if (boundary) current.owner = e->owner;
    current.items.push_back(e->item);
    prev = e;
  }
  if (prev != nullptr) flush(current);
  return result;
}

GroupedCorpus sessionize(const EventLog& log, double gap, double skip_threshold) {
  auto r = sessionize_with_report(log, gap, skip_threshold);
  if (r.missing_durations > 0)
    std::cerr << "warning: " << r.missing_durations
              << " records have no duration; skip filtering not applied to them\n";
  return std::move(r.corpus);
}

GroupedCorpus clean_playlists(const GroupedCorpus& playlists, std::size_t min_unique,
                              double length_sigma_mult) {
  if (playlists.kind != CorpusKind::playlist)
    throw std::invalid_argument("clean_playlists: corpus kind must be playlist");
  const auto n = playlists.groups.size();
  if (n < 2) throw std::runtime_error("insufficient corpus: need at least 2 playlists");

  double mean = 0.0;
  for (const auto& g : playlists.groups) mean += static_cast<double>(g.items.size());
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& g : playlists.groups) {
    double d = static_cast<double>(g.items.size()) - mean;
    var += d * d;
  }
  const double sigma = std::sqrt(var / static_cast<double>(n));
  const double max_len = length_sigma_mult * sigma;

  GroupedCorpus out{{}, CorpusKind::playlist};
  for (const auto& g : playlists.groups) {
    if (static_cast<double>(g.items.size()) > max_len) continue;
    auto items = unique_items(g.items);
    if (items.size() < min_unique) continue;
    out.groups.push_back({g.owner, std::move(items)});
  }
  return out;
}

GroupedCorpus filter_active_owners(const GroupedCorpus& corpus, std::size_t min_groups) {
  std::map<std::string, std::size_t> per_owner;
  for (const auto& g : corpus.groups) ++per_owner[g.owner];
  GroupedCorpus out{{}, corpus.kind};
  for (const auto& g : corpus.groups)
    if (per_owner[g.owner] > min_groups) out.groups.push_back(g);
  return out;
}

CooccurrenceCounts build_cooccurrence(const GroupedCorpus& corpus,
                                      bool per_owner_normalize,
                                      std::size_t min_count) {
  if (corpus.groups.empty())
    throw std::invalid_argument("build_cooccurrence: empty corpus");

  std::vector<std::string> items;
  {
    std::unordered_set<std::string> seen;
    for (const auto& g : corpus.groups)
      for (const auto& it : g.items)
        if (seen.insert(it).second) items.push_back(it);
  }
  std::sort(items.begin(), items.end());
  Vocabulary vocab(std::move(items));

  // Dense-index groups once; repeated items inside a group count once.
  std::vector<std::vector<NodeId>> indexed;
  indexed.reserve(corpus.groups.size());
  for (const auto& g : corpus.groups) {
    std::vector<NodeId> ids;
    ids.reserve(g.items.size());
    for (const auto& it : g.items) ids.push_back(vocab.index(it));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    indexed.push_back(std::move(ids));
  }

  std::unordered_map<std::uint64_t, std::uint64_t> raw;
  for (const auto& ids : indexed)
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a + 1; b < ids.size(); ++b) ++raw[pair_key(ids[a], ids[b])];

  std::unordered_map<std::uint64_t, double> weights;
  if (!per_owner_normalize) {
    for (const auto& [key, c] : raw)
      if (c >= min_count) weights[key] = static_cast<double>(c);
  } else {
    std::unordered_map<std::string, std::size_t> owner_groups;
    for (const auto& g : corpus.groups) ++owner_groups[g.owner];
    for (std::size_t gi = 0; gi < indexed.size(); ++gi) {
      const auto& ids = indexed[gi];
      const double inc = 1.0 / static_cast<double>(owner_groups[corpus.groups[gi].owner]);
      for (std::size_t a = 0; a < ids.size(); ++a)
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
          auto key = pair_key(ids[a], ids[b]);
          if (raw[key] >= min_count) weights[key] += inc;
        }
    }
  }

  std::vector<Triplet> trip;
  trip.reserve(weights.size());
  for (const auto& [key, w] : weights)
    trip.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), w});
  return {SparseSymmetricMatrix::from_triplets(vocab.size(), trip), std::move(vocab)};
}

std::string synth_item_id(std::size_t node) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "n%05zu", node);
  return buf;
}

SynthCorpus synth_corpus(const SynthParams& p) {
  if (p.communities == 0 || p.nodes_per_community == 0)
    throw std::invalid_argument("synth_corpus: communities and nodes_per_community must be > 0");
  if (!(p.intra_prob >= 0.0 && p.intra_prob <= 1.0))
    throw std::invalid_argument("synth_corpus: intra_prob must lie in [0, 1]");
  if (p.min_group_size < 2 || p.min_group_size > p.max_group_size)
    throw std::invalid_argument("synth_corpus: need 2 <= min_group_size <= max_group_size");

  const std::size_t npc = p.nodes_per_community;
  const std::size_t total = p.communities * npc;
  const std::size_t outside = total - npc;

  std::size_t cap = total;
  if (p.intra_prob >= 1.0 || outside == 0) cap = npc;
  else if (p.intra_prob <= 0.0) cap = outside;
  if (cap < p.min_group_size)
    throw std::invalid_argument("synth_corpus: not enough nodes for min_group_size");
  const std::size_t max_size = std::min(p.max_group_size, cap);

  SynthCorpus out;
  out.corpus.kind = CorpusKind::playlist;
  out.corpus.groups.reserve(p.groups);
  out.group_home.reserve(p.groups);
  for (std::size_t v = 0; v < total; ++v)
    out.community[synth_item_id(v)] = static_cast<std::uint32_t>(v / npc);

  Rng rng(p.seed);
  std::vector<std::size_t> members;
  for (std::size_t g = 0; g < p.groups; ++g) {
    const auto home = rng.below(p.communities);
    const auto size = p.min_group_size + rng.below(max_size - p.min_group_size + 1);
    members.clear();
    while (members.size() < size) {
      std::size_t v;
      if (outside == 0 || rng.bernoulli(p.intra_prob)) {
        v = home * npc + rng.below(npc);
      } else {
        v = rng.below(outside);
        if (v >= home * npc) v += npc;
      }
      if (std::find(members.begin(), members.end(), v) == members.end()) members.push_back(v);
    }
    Group grp;
    grp.owner = "p" + std::to_string(g);
    for (auto v : members) grp.items.push_back(synth_item_id(v));
    out.corpus.groups.push_back(std::move(grp));
    out.group_home.push_back(static_cast<std::uint32_t>(home));
  }
  return out;
}

}  // namespace nprox
