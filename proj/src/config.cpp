#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "nprox/io.hpp"
#include "nprox/pipeline.hpp"

namespace nprox {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get(const YAML::Node& node, const std::string& key, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

DatasetSource parse_source(const std::string& s) {
  if (s == "synth") return DatasetSource::synth;
  if (s == "logs") return DatasetSource::logs;
  if (s == "playlists") return DatasetSource::playlists;
  if (s == "triplets") return DatasetSource::triplets;
  throw ConfigError("dataset.source must be one of synth, logs, playlists, triplets (got '" + s + "')");
}

ModelKind parse_kind(const std::string& s) {
  if (s == "svd") return ModelKind::svd;
  if (s == "deepwalk" || s == "dw") return ModelKind::deepwalk;
  if (s == "node2vec" || s == "n2v") return ModelKind::node2vec;
  if (s == "import") return ModelKind::import;
  if (s == "random") return ModelKind::random;
  throw ConfigError("unknown model kind '" + s + "'");
}

SvdMethod parse_svd_method(const std::string& s) {
  if (s == "auto") return SvdMethod::automatic;
  if (s == "dense") return SvdMethod::dense;
  if (s == "randomized") return SvdMethod::randomized;
  throw ConfigError("svd method must be auto, dense or randomized");
}

// "a.b.0.c=value": creates intermediate maps; numeric segments index
// sequences.
void apply_override(YAML::Node root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);

  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    const auto& part = parts[i];
    const bool numeric = !part.empty() && std::all_of(part.begin(), part.end(), ::isdigit);
    if (numeric && cur.IsSequence()) {
      const auto idx = std::stoul(part);
      if (idx >= cur.size()) throw ConfigError("override index out of range: " + key);
      chain.push_back(cur[idx]);
    } else {
      if (!cur[part]) cur[part] = YAML::Node(YAML::NodeType::Map);
      chain.push_back(cur[part]);
    }
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception&) {
    parsed = YAML::Node(value);
  }
  chain.back()[parts.back()] = parsed;
}

ModelConfig parse_model(const YAML::Node& node, const fs::path& base, std::size_t index) {
  if (!node.IsMap()) throw ConfigError("models[" + std::to_string(index) + "] must be a map");
  const auto kind_text = get<std::string>(node, "kind", "");
  if (kind_text.empty()) throw ConfigError("models[" + std::to_string(index) + "]: missing kind");

  ModelConfig m;
  m.kind = parse_kind(kind_text);
  if (m.kind == ModelKind::node2vec && node["preset"])
    m = node2vec_preset(get<std::string>(node, "preset", ""));
  m.kind = parse_kind(kind_text);
  m.name = get<std::string>(node, "name", kind_text);
  m.dim = get<std::size_t>(node, "dim", m.dim);
  m.walk_length = get<std::size_t>(node, "walk_length", m.walk_length);
  m.walks_per_node = get<std::size_t>(node, "walks_per_node", m.walks_per_node);
  m.p = get<double>(node, "p", m.p);
  m.q = get<double>(node, "q", m.q);
  m.sgns.window = get<std::size_t>(node, "window", m.sgns.window);
  m.sgns.negatives = get<std::size_t>(node, "negatives", m.sgns.negatives);
  m.sgns.epochs = get<std::size_t>(node, "epochs", m.sgns.epochs);
  m.sgns.initial_learning_rate = get<double>(node, "learning_rate", m.sgns.initial_learning_rate);
  m.sgns.threads = get<std::size_t>(node, "sgns_threads", m.sgns.threads);
  m.sgns.dim = m.dim;
  m.svd_method = parse_svd_method(get<std::string>(node, "method", "auto"));
  m.path = resolve(base, get<std::string>(node, "path", ""));
  return m;
}

}  // namespace

ModelConfig node2vec_preset(const std::string& preset) {
  ModelConfig m;
  m.kind = ModelKind::node2vec;
  m.name = "n2v";
  if (preset == "sess") {
    m.p = 0.25;
    m.q = 1.0;
  } else if (preset == "pl") {
    m.p = 1.0;
    m.q = 4.0;
  } else {
    throw ConfigError("unknown node2vec preset '" + preset + "' (expected sess or pl)");
  }
  return m;
}

RunConfig load_config(const std::string& yaml_text, const fs::path& base_dir,
                      const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config root must be a map");
  for (const auto& o : overrides) apply_override(root, o);

  RunConfig cfg;
  if (!root["seed"]) throw ConfigError("config: 'seed' is mandatory");
  cfg.seed = get<std::uint64_t>(root, "seed", 0);
  cfg.output_dir = resolve(base_dir, get<std::string>(root, "output_dir", "nprox-out"));
  if (auto c = get<std::string>(root, "cache_dir", ""); !c.empty()) cfg.cache_dir = resolve(base_dir, c);

  const auto ds = root["dataset"];
  if (!ds) throw ConfigError("config: 'dataset' section is mandatory");
  cfg.dataset.source = parse_source(get<std::string>(ds, "source", "synth"));
  cfg.dataset.path = resolve(base_dir, get<std::string>(ds, "path", ""));
  cfg.dataset.vocab = resolve(base_dir, get<std::string>(ds, "vocab", ""));
  cfg.dataset.labels = resolve(base_dir, get<std::string>(ds, "labels", ""));
  if (const auto sy = ds["synth"]) {
    auto& s = cfg.dataset.synth;
    s.communities = get<std::size_t>(sy, "communities", s.communities);
    s.nodes_per_community = get<std::size_t>(sy, "nodes_per_community", s.nodes_per_community);
    s.groups = get<std::size_t>(sy, "groups", s.groups);
    s.intra_prob = get<double>(sy, "intra_prob", s.intra_prob);
    s.min_group_size = get<std::size_t>(sy, "min_group_size", s.min_group_size);
    s.max_group_size = get<std::size_t>(sy, "max_group_size", s.max_group_size);
  }

  if (const auto f = root["filters"]) {
    auto& fc = cfg.filters;
    fc.gap = get<double>(f, "gap", fc.gap);
    fc.skip = get<double>(f, "skip", fc.skip);
    fc.min_unique = get<std::size_t>(f, "min_unique", fc.min_unique);
    fc.sigma_mult = get<double>(f, "sigma_mult", fc.sigma_mult);
    fc.min_owner_groups = get<std::size_t>(f, "min_owner_groups", fc.min_owner_groups);
    fc.max_removal_fraction = get<double>(f, "max_removal_fraction", fc.max_removal_fraction);
    if (f["min_count"]) fc.min_count = get<std::size_t>(f, "min_count", 0);
    if (f["per_owner_normalize"]) fc.per_owner_normalize = get<bool>(f, "per_owner_normalize", false);
  }

  if (const auto p = root["proximity"]) {
    cfg.proximity.threshold = get<double>(p, "threshold", 0.0);
    const auto masking = get<std::string>(p, "masking", "prose");
    if (masking == "prose") cfg.proximity.masking = MaskingRule::prose;
    else if (masking == "formula") cfg.proximity.masking = MaskingRule::formula;
    else throw ConfigError("proximity.masking must be prose or formula");
  }

  if (const auto models = root["models"]) {
    if (!models.IsSequence()) throw ConfigError("config: 'models' must be a list");
    for (std::size_t i = 0; i < models.size(); ++i)
      cfg.models.push_back(parse_model(models[i], base_dir, i));
  }

  if (const auto e = root["evaluation"]) {
    auto& ec = cfg.evaluation;
    ec.w0_cap = get<std::size_t>(e, "w0_cap", ec.w0_cap);
    ec.exact_w0 = get<bool>(e, "exact_w0", ec.exact_w0);
    ec.alpha = get<double>(e, "alpha", ec.alpha);
    ec.threads = get<std::size_t>(e, "threads", ec.threads);
    ec.diagnostics = get<bool>(e, "diagnostics", ec.diagnostics);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const fs::path& path, const std::vector<std::string>& overrides) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return load_config(text, path.parent_path().empty() ? fs::path(".") : path.parent_path(), overrides);
}

void validate(const RunConfig& cfg) {
  const auto& ds = cfg.dataset;
  auto require_file = [](const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError(what + " path is required");
    if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
  };
  switch (ds.source) {
    case DatasetSource::synth:
      if (ds.synth.communities == 0 || ds.synth.nodes_per_community == 0)
        throw ConfigError("dataset.synth: communities and nodes_per_community must be > 0");
      if (!(ds.synth.intra_prob >= 0.0 && ds.synth.intra_prob <= 1.0))
        throw ConfigError("dataset.synth.intra_prob must lie in [0, 1]");
      break;
    case DatasetSource::logs: require_file(ds.path, "dataset log file"); break;
    case DatasetSource::playlists: require_file(ds.path, "dataset playlist file"); break;
    case DatasetSource::triplets:
      require_file(ds.path, "dataset triplet file");
      require_file(ds.vocab, "dataset vocabulary file");
      break;
  }
  if (!ds.labels.empty()) require_file(ds.labels, "label file");

  const auto& f = cfg.filters;
  if (!(f.gap > 0.0)) throw ConfigError("filters.gap must be > 0");
  if (!(f.skip >= 0.0)) throw ConfigError("filters.skip must be >= 0");
  if (!(f.max_removal_fraction >= 0.0 && f.max_removal_fraction < 1.0))
    throw ConfigError("filters.max_removal_fraction must lie in [0, 1)");
  if (!(cfg.proximity.threshold >= 0.0)) throw ConfigError("proximity.threshold must be >= 0");

  if (cfg.models.empty()) throw ConfigError("config: at least one model is required");
  std::set<std::string> names;
  for (const auto& m : cfg.models) {
    if (m.name.empty()) throw ConfigError("model name must not be empty");
    if (m.name.find_first_of(",/\\ \t") != std::string::npos)
      throw ConfigError("model name '" + m.name + "' contains separators");
    if (!names.insert(m.name).second) throw ConfigError("duplicate model name '" + m.name + "'");
    if (m.kind == ModelKind::import) require_file(m.path, "embedding import for model " + m.name);
    if (m.dim == 0) throw ConfigError("model " + m.name + ": dim must be >= 1");
    if (m.kind == ModelKind::deepwalk || m.kind == ModelKind::node2vec) {
      if (m.walk_length < 2) throw ConfigError("model " + m.name + ": walk_length must be >= 2");
      if (m.sgns.window < 1 || m.sgns.epochs < 1)
        throw ConfigError("model " + m.name + ": window and epochs must be >= 1");
      if (!(m.p > 0.0 && m.q > 0.0)) throw ConfigError("model " + m.name + ": p and q must be > 0");
    }
  }
  if (!(cfg.evaluation.alpha > 0.0 && cfg.evaluation.alpha < 1.0))
    throw ConfigError("evaluation.alpha must lie in (0, 1)");
}

}  // namespace nprox
