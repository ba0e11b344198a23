#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nprox/attraction.hpp"
#include "nprox/embed.hpp"
#include "nprox/ingest.hpp"
#include "nprox/interp.hpp"
#include "nprox/proximity.hpp"

namespace nprox {

// Invalid configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure inside a pipeline stage; maps to exit code 2.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class DatasetSource { synth, logs, playlists, triplets };

struct DatasetConfig {
  DatasetSource source = DatasetSource::synth;
  std::filesystem::path path;    // logs / playlists / counts triplets
  std::filesystem::path vocab;   // triplets source only
  std::filesystem::path labels;  // optional "item<TAB>label" file
  SynthParams synth;
};

struct FilterConfig {
  double gap = 1200.0;
  double skip = 30.0;
  std::size_t min_unique = 10;
  double sigma_mult = 2.0;
  std::size_t min_owner_groups = 0;
  double max_removal_fraction = 0.5;
  // Defaults depend on the source: 2 for playlists/synth, 0 for sessions.
  std::optional<std::size_t> min_count;
  // Defaults to true for sessions, false otherwise.
  std::optional<bool> per_owner_normalize;
};

struct ProximityConfig {
  double threshold = 0.0;
  MaskingRule masking = MaskingRule::prose;
};

enum class ModelKind { svd, deepwalk, node2vec, import, random };

struct ModelConfig {
  std::string name;
  ModelKind kind = ModelKind::svd;
  std::size_t dim = 128;
  // Walk-based models.
  std::size_t walk_length = 20;
  std::size_t walks_per_node = 10;
  double p = 1.0;
  double q = 1.0;
  SgnsConfig sgns;
  // SVD.
  SvdMethod svd_method = SvdMethod::automatic;
  // Import.
  std::filesystem::path path;
};

struct EvaluationConfig {
  std::size_t w0_cap = 5000;
  bool exact_w0 = false;
  double alpha = 0.05;
  std::size_t threads = 1;
  bool diagnostics = true;  // components / shortest paths in the report
};

struct RunConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  FilterConfig filters;
  ProximityConfig proximity;
  std::vector<ModelConfig> models;
  EvaluationConfig evaluation;
  std::filesystem::path output_dir = "nprox-out";
  std::optional<std::filesystem::path> cache_dir;  // no caching when empty
};

// Parses the YAML run configuration. Relative paths resolve against
// `base_dir`. `overrides` are "dotted.key=value" assignments applied before
// validation. Throws ConfigError.
RunConfig load_config(const std::string& yaml_text, const std::filesystem::path& base_dir = ".",
                      const std::vector<std::string>& overrides = {});
RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

// Checks referenced paths and parameter ranges. Throws ConfigError.
void validate(const RunConfig& cfg);

// Named node2vec presets: "sess" (p = 0.25, q = 1) and "pl" (p = 1, q = 4).
ModelConfig node2vec_preset(const std::string& preset);

struct DatasetSummary {
  std::size_t nodes_before_filter = 0;
  std::size_t gamma = 0;
  std::size_t nodes = 0;
  std::array<std::size_t, 3> edges{};
  std::array<std::vector<double>, 3> class_means;
  std::optional<double> modularity_before;
  std::optional<double> modularity_after;
  std::size_t components = 0;
  std::size_t largest_component = 0;
  double average_shortest_path = 0.0;
};

struct ModelOutcome {
  ModelConfig model;
  AttractionResult attraction;
  InterpretabilityReport report;
};

struct RunResult {
  DatasetSummary dataset;
  Vocabulary vocab;
  std::vector<ModelOutcome> models;
  std::vector<RankEntry> ranking;  // empty with fewer than two models
  std::map<std::string, bool> cache_hits;  // stage key label -> hit
  std::string config_digest;
};

RunResult run_pipeline(const RunConfig& cfg);

enum class ReportFormat { json, csv, curves };

std::string render_report(const RunResult& result, ReportFormat format);
std::filesystem::path emit_report(const RunResult& result, ReportFormat format,
                                  const std::filesystem::path& dir);

// Fitted sigmoid of a mean hit curve and its samples on 121 points of
// [-6, 6], as written to the curves file.
struct CurveSamples {
  SigmoidFit fit;
  std::vector<double> x, mean_hit, sigmoid;
};
CurveSamples sample_curve(const std::vector<double>& mean_hit);

std::string sha256_hex(const std::string& data);

}  // namespace nprox
