#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nprox/attraction.hpp"
#include "nprox/ingest.hpp"
#include "nprox/proximity.hpp"
#include "nprox/sparse_matrix.hpp"

namespace nprox::io {

// Triplet format: a "# dim <N>" header, then one "i<TAB>j<TAB>weight" line per
// edge with i < j. Weights are written with round-trip precision.
void write_triplets(const std::filesystem::path& path, const SparseSymmetricMatrix& m);
SparseSymmetricMatrix read_triplets(const std::filesystem::path& path);

// One "index<TAB>item-id" line per node, indices 0..N-1 in order.
void write_vocab(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocab(const std::filesystem::path& path);

// "owner<TAB>timestamp<TAB>item[<TAB>duration]" per line.
EventLog read_event_log(const std::filesystem::path& path);
void write_event_log(const std::filesystem::path& path, const EventLog& log);

// One playlist per line, item-ids separated by spaces. Owners are "line<k>".
GroupedCorpus read_playlists(const std::filesystem::path& path);
void write_playlists(const std::filesystem::path& path, const GroupedCorpus& corpus);

// "item-id<TAB>label" pairs. Labels are mapped to dense integer ids in
// lexicographic order; items outside `vocab` are ignored.
std::vector<std::int32_t> read_labels(const std::filesystem::path& path, const Vocabulary& vocab,
                                      std::vector<std::string>* label_names = nullptr);

// Stack directory: S.tsv, P.tsv, H.tsv triplet files plus classes.tsv with
// "i<TAB>j<TAB>network<TAB>class" for every edge.
void write_stack(const std::filesystem::path& dir, const ProximityStack& stack);
ProximityStack read_stack(const std::filesystem::path& dir);

// CSV: target,network,class,size,g,s,residual,delta,delta_dot,valid. W0
// control rows use network "W0" and class 0. `vocab` supplies target ids.
void write_attraction_csv(const std::filesystem::path& path,
                          std::span<const AttractionRecord> records, const Vocabulary& vocab);
std::vector<AttractionRecord> read_attraction_csv(const std::filesystem::path& path,
                                                  const Vocabulary& vocab);

// Writes to a sibling temporary file then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace nprox::io
