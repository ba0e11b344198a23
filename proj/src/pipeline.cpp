#include "nprox/pipeline.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include "json.hpp"
#include <sstream>

#include "nprox/graph.hpp"
#include "nprox/io.hpp"
#include "nprox/random.hpp"

namespace nprox {

namespace fs = std::filesystem;
using io::format_double;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

namespace {

// Stage artifacts live in <cache>/<stage>-<key>/ and count only once the
// ".complete" marker exists, so interrupted stages are recomputed.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::optional<fs::path> root) : root_(std::move(root)) {}

  bool enabled() const { return root_.has_value(); }
  fs::path dir(const std::string& stage, const std::string& key) const {
    return *root_ / (stage + "-" + key.substr(0, 24));
  }
  bool complete(const fs::path& d) const { return fs::exists(d / ".complete"); }
  void mark(const fs::path& d, const std::string& key) const { io::write_atomic(d / ".complete", key + "\n"); }

 private:
  std::optional<fs::path> root_;
};

std::string file_digest(const fs::path& p) { return p.empty() ? "-" : sha256_hex(io::read_file(p)); }

const char* source_name(DatasetSource s) {
  switch (s) {
    case DatasetSource::synth: return "synth";
    case DatasetSource::logs: return "logs";
    case DatasetSource::playlists: return "playlists";
    case DatasetSource::triplets: return "triplets";
  }
  return "?";
}

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::svd: return "svd";
    case ModelKind::deepwalk: return "deepwalk";
    case ModelKind::node2vec: return "node2vec";
    case ModelKind::import: return "import";
    case ModelKind::random: return "random";
  }
  return "?";
}

std::size_t effective_min_count(const RunConfig& cfg) {
  if (cfg.filters.min_count) return *cfg.filters.min_count;
  return cfg.dataset.source == DatasetSource::logs ? 0 : 2;
}

bool effective_normalize(const RunConfig& cfg) {
  if (cfg.filters.per_owner_normalize) return *cfg.filters.per_owner_normalize;
  return cfg.dataset.source == DatasetSource::logs;
}

std::string describe_dataset(const RunConfig& cfg) {
  const auto& d = cfg.dataset;
  const auto& f = cfg.filters;
  std::ostringstream os;
  os << "source=" << source_name(d.source) << ";seed=" << cfg.seed;
  if (d.source == DatasetSource::synth)
    os << ";communities=" << d.synth.communities << ";npc=" << d.synth.nodes_per_community
       << ";groups=" << d.synth.groups << ";intra=" << format_double(d.synth.intra_prob)
       << ";gmin=" << d.synth.min_group_size << ";gmax=" << d.synth.max_group_size;
  else
    os << ";data=" << file_digest(d.path) << ";vocab=" << file_digest(d.vocab);
  os << ";gap=" << format_double(f.gap) << ";skip=" << format_double(f.skip)
     << ";min_unique=" << f.min_unique << ";sigma=" << format_double(f.sigma_mult)
     << ";owner_groups=" << f.min_owner_groups << ";min_count=" << effective_min_count(cfg)
     << ";normalize=" << effective_normalize(cfg);
  return os.str();
}

std::string describe_model(const ModelConfig& m) {
  std::ostringstream os;
  os << "name=" << m.name << ";kind=" << kind_name(m.kind) << ";dim=" << m.dim;
  switch (m.kind) {
    case ModelKind::svd: os << ";method=" << static_cast<int>(m.svd_method); break;
    case ModelKind::deepwalk:
    case ModelKind::node2vec:
      os << ";l=" << m.walk_length << ";walks=" << m.walks_per_node << ";p=" << format_double(m.p)
         << ";q=" << format_double(m.q) << ";c=" << m.sgns.window << ";neg=" << m.sgns.negatives
         << ";epochs=" << m.sgns.epochs << ";lr=" << format_double(m.sgns.initial_learning_rate)
         << ";threads=" << m.sgns.threads;
      break;
    case ModelKind::import: os << ";file=" << file_digest(m.path); break;
    case ModelKind::random: break;
  }
  return os.str();
}

// Runs `body` and rethrows any failure as a StageError naming `stage`.
template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct IngestArtifacts {
  CooccurrenceCounts counts;
  std::vector<std::int32_t> labels;  // empty when unlabeled
};

IngestArtifacts ingest_stage(const RunConfig& cfg) {
  IngestArtifacts out;
  const auto& d = cfg.dataset;
  const auto& f = cfg.filters;
  const auto min_count = effective_min_count(cfg);
  const bool normalize = effective_normalize(cfg);
  switch (d.source) {
    case DatasetSource::synth: {
      auto params = d.synth;
      params.seed = derive_seed(cfg.seed, "synth");
      auto synth = synth_corpus(params);
      out.counts = build_cooccurrence(synth.corpus, normalize, min_count);
      out.labels.resize(out.counts.vocab.size());
      for (std::size_t i = 0; i < out.labels.size(); ++i)
        out.labels[i] = static_cast<std::int32_t>(synth.community.at(out.counts.vocab.item(static_cast<NodeId>(i))));
      break;
    }
    case DatasetSource::logs: {
      auto corpus = sessionize(io::read_event_log(d.path), f.gap, f.skip);
      if (f.min_owner_groups > 0) corpus = filter_active_owners(corpus, f.min_owner_groups);
      out.counts = build_cooccurrence(corpus, normalize, min_count);
      break;
    }
    case DatasetSource::playlists: {
      auto corpus = clean_playlists(io::read_playlists(d.path), f.min_unique, f.sigma_mult);
      out.counts = build_cooccurrence(corpus, normalize, min_count);
      break;
    }
    case DatasetSource::triplets: {
      out.counts.vocab = io::read_vocab(d.vocab);
      out.counts.matrix = io::read_triplets(d.path);
      if (out.counts.matrix.dimension() != out.counts.vocab.size())
        throw std::runtime_error("triplet dimension does not match the vocabulary size");
      break;
    }
  }
  if (!d.labels.empty()) out.labels = io::read_labels(d.labels, out.counts.vocab);
  return out;
}

void write_labels(const fs::path& p, const std::vector<std::int32_t>& labels) {
  std::string s;
  for (auto l : labels) s += std::to_string(l) + '\n';
  io::write_atomic(p, s);
}

std::vector<std::int32_t> read_label_ids(const fs::path& p) {
  std::vector<std::int32_t> out;
  if (!fs::exists(p)) return out;
  std::ifstream is(p);
  for (std::int32_t v; is >> v;) out.push_back(v);
  return out;
}

std::optional<double> safe_modularity(const SparseSymmetricMatrix& g,
                                      const std::vector<std::int32_t>& labels) {
  if (labels.empty()) return std::nullopt;
  try {
    return modularity(LabeledGraph{g, labels}, false);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

EmbeddingMatrix embed_model(const ModelConfig& m, const SparseSymmetricMatrix& s,
                            const Vocabulary& vocab, std::uint64_t seed, std::size_t threads) {
  switch (m.kind) {
    case ModelKind::svd: {
      SvdOptions opts;
      opts.method = m.svd_method;
      return svd_embed(s, std::min(m.dim, s.dimension()), seed, opts);
    }
    case ModelKind::deepwalk:
    case ModelKind::node2vec: {
      const auto strategy = m.kind == ModelKind::deepwalk ? WalkStrategy::uniform()
                                                          : WalkStrategy::node2vec(m.p, m.q);
      auto walks = generate_walks(s, strategy, m.walks_per_node, m.walk_length,
                                  derive_seed(seed, "walks"), threads);
      auto sg = m.sgns;
      sg.dim = m.dim;
      sg.seed = derive_seed(seed, "sgns");
      return train_sgns(walks, s.dimension(), sg).embedding;
    }
    case ModelKind::import: return load_embedding(m.path, vocab);
    case ModelKind::random: return random_embedding(s.dimension(), m.dim, seed);
  }
  throw std::logic_error("unknown model kind");
}

void write_attraction_cache(const fs::path& dir, const AttractionResult& a, const Vocabulary& vocab) {
  io::write_attraction_csv(dir / "records.csv", a.records, vocab);
  std::string curves;
  for (std::size_t c = 0; c < kPartitionCells; ++c) {
    curves += std::to_string(c) + '\t' + std::to_string(a.curves[c].valid);
    for (double v : a.curves[c].mean_hit) curves += '\t' + format_double(v);
    curves += '\n';
  }
  io::write_atomic(dir / "curves.tsv", curves);
  const auto& f = a.null.fit;
  io::write_atomic(dir / "null.tsv", format_double(f.g) + '\t' + format_double(f.s) + '\t' +
                                         format_double(f.residual) + '\t' +
                                         std::to_string(f.iterations) + '\t' +
                                         format_double(a.null.delta) + '\n');
}

AttractionResult read_attraction_cache(const fs::path& dir, const Vocabulary& vocab) {
  AttractionResult a;
  a.records = io::read_attraction_csv(dir / "records.csv", vocab);
  for (auto& r : a.records) r.fit.iterations = 0;
  std::ifstream cs(dir / "curves.tsv");
  std::string line;
  while (std::getline(cs, line)) {
    std::istringstream ls(line);
    std::size_t c = 0;
    ls >> c;
    if (c >= kPartitionCells) throw std::runtime_error("corrupt curves cache");
    ls >> a.curves[c].valid;
    std::string tok;
    while (ls >> tok) a.curves[c].mean_hit.push_back(std::stod(tok));
  }
  std::ifstream ns(dir / "null.tsv");
  std::string g, s, res, delta;
  ns >> g >> s >> res >> a.null.fit.iterations >> delta;
  a.null.fit.g = std::stod(g);
  a.null.fit.s = std::stod(s);
  a.null.fit.residual = std::stod(res);
  a.null.fit.converged = true;
  a.null.delta = std::stod(delta);
  return a;
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  RunResult result;
  ArtifactCache cache(cfg.cache_dir);

  const std::string dataset_desc = in_stage("ingest", [&] { return describe_dataset(cfg); });
  const std::string ingest_key = sha256_hex("ingest|" + dataset_desc);

  // Runs `compute` unless a complete cached copy exists; `save`/`load`
  // persist the stage outputs.
  auto staged = [&](const std::string& stage, const std::string& key, auto&& compute,
                    auto&& save, auto&& load) {
    return in_stage(stage, [&] {
      if (cache.enabled()) {
        const auto dir = cache.dir(stage, key);
        if (cache.complete(dir)) {
          result.cache_hits[stage] = true;
          return load(dir);
        }
        auto value = compute();
        fs::create_directories(dir);
        save(dir, value);
        cache.mark(dir, key);
        result.cache_hits[stage] = false;
        return value;
      }
      result.cache_hits[stage] = false;
      return compute();
    });
  };

  auto ingest = staged(
      "ingest", ingest_key, [&] { return ingest_stage(cfg); },
      [](const fs::path& dir, const IngestArtifacts& a) {
        io::write_triplets(dir / "counts.tsv", a.counts.matrix);
        io::write_vocab(dir / "vocab.tsv", a.counts.vocab);
        if (!a.labels.empty()) write_labels(dir / "labels.txt", a.labels);
      },
      [](const fs::path& dir) {
        IngestArtifacts a;
        a.counts.matrix = io::read_triplets(dir / "counts.tsv");
        a.counts.vocab = io::read_vocab(dir / "vocab.tsv");
        a.labels = read_label_ids(dir / "labels.txt");
        return a;
      });

  const std::string ppmi_key = sha256_hex("ppmi|" + ingest_key);
  auto ppmi = staged(
      "ppmi", ppmi_key, [&] { return ppmi_transform(ingest.counts.matrix); },
      [](const fs::path& dir, const SparseSymmetricMatrix& m) { io::write_triplets(dir / "S_full.tsv", m); },
      [](const fs::path& dir) { return io::read_triplets(dir / "S_full.tsv"); });

  struct Filtered {
    DegreeFilterResult filter;
    Vocabulary vocab;
  };
  const std::string filter_key =
      sha256_hex("filter|" + ppmi_key + "|" + format_double(cfg.filters.max_removal_fraction));
  auto filtered = staged(
      "filter", filter_key,
      [&] {
        Filtered f;
        f.filter = low_degree_filter(ppmi, cfg.filters.max_removal_fraction);
        f.vocab = ingest.counts.vocab.subset(f.filter.kept);
        if (f.filter.matrix.empty()) throw std::runtime_error("no edges left after degree filtering");
        return f;
      },
      [](const fs::path& dir, const Filtered& f) {
        io::write_triplets(dir / "S.tsv", f.filter.matrix);
        io::write_vocab(dir / "vocab.tsv", f.vocab);
        std::string kept;
        for (auto k : f.filter.kept) kept += std::to_string(k) + '\n';
        io::write_atomic(dir / "kept.txt", kept);
        io::write_atomic(dir / "gamma.txt", std::to_string(f.filter.gamma) + '\n');
      },
      [](const fs::path& dir) {
        Filtered f;
        f.filter.matrix = io::read_triplets(dir / "S.tsv");
        f.vocab = io::read_vocab(dir / "vocab.tsv");
        std::ifstream ks(dir / "kept.txt");
        for (NodeId k; ks >> k;) f.filter.kept.push_back(k);
        std::ifstream gs(dir / "gamma.txt");
        gs >> f.filter.gamma;
        return f;
      });
  result.vocab = filtered.vocab;
  const auto& s = filtered.filter.matrix;

  const std::string stack_key =
      sha256_hex("proximity|" + filter_key + "|" + format_double(cfg.proximity.threshold) + "|" +
                 std::to_string(static_cast<int>(cfg.proximity.masking)));
  auto stack = staged(
      "proximity", stack_key,
      [&] {
        StackOptions opts;
        opts.threshold = cfg.proximity.threshold;
        opts.masking = cfg.proximity.masking;
        return build_stack(s, opts);
      },
      [](const fs::path& dir, const ProximityStack& st) { io::write_stack(dir, st); },
      [](const fs::path& dir) { return io::read_stack(dir); });

  auto& ds = result.dataset;
  ds.nodes_before_filter = ppmi.dimension();
  ds.gamma = filtered.filter.gamma;
  ds.nodes = s.dimension();
  for (Network net : kNetworks) {
    const auto n = static_cast<std::size_t>(net);
    ds.edges[n] = stack.network(net).edge_count();
    ds.class_means[n] = stack.classes[n].class_means;
  }
  if (!ingest.labels.empty()) {
    ds.modularity_before = safe_modularity(ppmi, ingest.labels);
    std::vector<std::int32_t> kept_labels;
    for (auto k : filtered.filter.kept) kept_labels.push_back(ingest.labels[k]);
    ds.modularity_after = safe_modularity(s, kept_labels);
  }
  if (cfg.evaluation.diagnostics) {
    const auto rep = component_report(s);
    ds.components = rep.sizes.size();
    ds.largest_component = rep.largest_size;
    ds.average_shortest_path = rep.average_shortest_path;
  }

  for (const auto& m : cfg.models) {
    const auto model_seed = derive_seed(cfg.seed, "model/" + m.name);
    const std::string embed_key = sha256_hex("embed|" + filter_key + "|" + describe_model(m) +
                                             "|" + std::to_string(model_seed));
    auto embedding = staged(
        "embed:" + m.name, embed_key,
        [&] { return embed_model(m, s, filtered.vocab, model_seed, cfg.evaluation.threads); },
        [&](const fs::path& dir, const EmbeddingMatrix& e) { store_embedding(dir / "embedding.txt", e, filtered.vocab); },
        [&](const fs::path& dir) { return load_embedding(dir / "embedding.txt", filtered.vocab); });

    const auto& ev = cfg.evaluation;
    const std::string attr_key =
        sha256_hex("attraction|" + embed_key + "|" + stack_key + "|" + std::to_string(ev.w0_cap) +
                   "|" + std::to_string(ev.exact_w0) + "|" + std::to_string(model_seed));
    auto attraction = staged(
        "attraction:" + m.name, attr_key,
        [&] {
          for (Eigen::Index r = 0; r < embedding.vectors.rows(); ++r)
            if (embedding.vectors.row(r).squaredNorm() == 0.0) {
              const auto node = static_cast<NodeId>(r);
              throw std::runtime_error("degenerate embedding row for item '" + filtered.vocab.item(node) +
                                       "' (degree " + std::to_string(s.degree(node)) + " after filtering)");
            }
          const auto idx = build_distance_index(embedding, ev.threads);
          AttractionOptions opts;
          opts.w0_cap = ev.w0_cap;
          opts.exact_w0 = ev.exact_w0;
          opts.seed = derive_seed(model_seed, "w0");
          opts.threads = ev.threads;
          return compute_attraction(idx, stack, opts);
        },
        [&](const fs::path& dir, const AttractionResult& a) { write_attraction_cache(dir, a, filtered.vocab); },
        [&](const fs::path& dir) { return read_attraction_cache(dir, filtered.vocab); });

    ModelOutcome outcome;
    outcome.model = m;
    outcome.report = in_stage("interpret:" + m.name, [&] { return interpret(m.name, attraction, ev.alpha); });
    outcome.attraction = std::move(attraction);
    result.models.push_back(std::move(outcome));
  }

  if (result.models.size() >= 2) {
    std::vector<InterpretabilityReport> reports;
    for (const auto& mo : result.models) reports.push_back(mo.report);
    try {
      result.ranking = rank_models(reports);
    } catch (const std::invalid_argument&) {
      result.ranking.clear();
    }
  }

  std::string digest_src = dataset_desc + "|" + format_double(cfg.filters.max_removal_fraction) + "|" +
                           format_double(cfg.proximity.threshold) + "|" +
                           std::to_string(static_cast<int>(cfg.proximity.masking));
  for (const auto& m : cfg.models) digest_src += "|" + describe_model(m);
  digest_src += "|" + std::to_string(cfg.evaluation.w0_cap) + "|" + std::to_string(cfg.evaluation.exact_w0) +
                "|" + format_double(cfg.evaluation.alpha);
  result.config_digest = sha256_hex(digest_src);

  in_stage("report", [&] {
    fs::create_directories(cfg.output_dir);
    for (auto f : {ReportFormat::json, ReportFormat::csv, ReportFormat::curves})
      emit_report(result, f, cfg.output_dir);
    for (const auto& mo : result.models)
      io::write_attraction_csv(cfg.output_dir / ("attraction_" + mo.model.name + ".csv"),
                               mo.attraction.records, result.vocab);
    return 0;
  });
  return result;
}

CurveSamples sample_curve(const std::vector<double>& mean_hit) {
  CurveSamples out;
  out.fit = fit_sigmoid(mean_hit);
  const auto grid = hit_curve_abscissa(mean_hit.size());
  const double last = static_cast<double>(mean_hit.size() - 1);
  for (int k = 0; k <= 120; ++k) {
    const double x = -6.0 + 0.1 * k;
    // Linear interpolation of the mean hit curve at x.
    const double pos = (x + 6.0) / 12.0 * last;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, last - 1));
    const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    out.x.push_back(x);
    out.mean_hit.push_back(mean_hit[i] + frac * (mean_hit[i + 1] - mean_hit[i]));
    out.sigmoid.push_back(sigmoid_curve(out.fit.g, out.fit.s, x));
    (void)grid;
  }
  return out;
}

namespace {

std::string cell_label(std::size_t c) { return c == 0 ? "W0" : "W" + std::to_string((c - 1) % kWeightClasses + 1); }

std::string pair_label(std::size_t k) {
  const auto p = class_pairs()[k];
  return "W" + std::to_string(p.first) + "-W" + std::to_string(p.second);
}

nlohmann::ordered_json network_json(const NetworkReport& nr) {
  nlohmann::ordered_json j;
  j["available"] = nr.available;
  if (!nr.available) j["reason"] = nr.reason;
  j["I"] = nr.available ? nlohmann::ordered_json(nr.I) : nlohmann::ordered_json(nullptr);
  j["js_std"] = nr.js_std;
  j["starred"] = nr.available && nr.ks.starred;
  j["sigma_of_means"] = nr.sigma_of_means;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < kScoreClasses; ++c)
    classes.push_back({{"class", "W" + std::to_string(c)},
                       {"size", nr.class_sizes[c]},
                       {"mean_delta_dot", nr.class_means[c]},
                       {"std_delta_dot", nr.class_stds[c]}});
  auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
  if (nr.available)
    for (std::size_t k = 0; k < kClassPairs; ++k)
      pairs.push_back({{"pair", pair_label(k)},
                       {"js", nr.js[k]},
                       {"ks_statistic", nr.ks.pairs[k].statistic},
                       {"ks_p_value", nr.ks.pairs[k].p_value},
                       {"significant", nr.ks.pairs[k].significant},
                       {"approximate", nr.ks.pairs[k].approximate}});
  return j;
}

std::string render_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["config_digest"] = r.config_digest;
  const auto& d = r.dataset;
  auto& dj = j["dataset"];
  dj["nodes_before_filter"] = d.nodes_before_filter;
  dj["gamma"] = d.gamma;
  dj["nodes"] = d.nodes;
  for (Network net : kNetworks) {
    const auto n = static_cast<std::size_t>(net);
    dj["networks"][std::string(network_name(net))] = {{"edges", d.edges[n]}, {"class_mean_weights", d.class_means[n]}};
  }
  dj["modularity_before"] = d.modularity_before ? nlohmann::ordered_json(*d.modularity_before) : nullptr;
  dj["modularity_after"] = d.modularity_after ? nlohmann::ordered_json(*d.modularity_after) : nullptr;
  dj["components"] = d.components;
  dj["largest_component"] = d.largest_component;
  dj["average_shortest_path"] = d.average_shortest_path;

  auto& models = j["models"] = nlohmann::ordered_json::array();
  for (const auto& mo : r.models) {
    nlohmann::ordered_json mj;
    mj["name"] = mo.model.name;
    mj["kind"] = kind_name(mo.model.kind);
    mj["null_delta"] = mo.report.null_delta;
    for (Network net : kNetworks)
      mj["networks"][std::string(network_name(net))] = network_json(mo.report.networks[static_cast<std::size_t>(net)]);
    models.push_back(std::move(mj));
  }
  auto& ranking = j["ranking"] = nlohmann::ordered_json::array();
  for (const auto& e : r.ranking) {
    nlohmann::ordered_json ej{{"model", e.model}, {"mean_rank", e.mean_rank}, {"mean_I", e.mean_I}};
    for (Network net : kNetworks) {
      const auto& rk = e.ranks[static_cast<std::size_t>(net)];
      ej["ranks"][std::string(network_name(net))] = rk ? nlohmann::ordered_json(*rk) : nullptr;
    }
    ranking.push_back(std::move(ej));
  }
  j["notes"] = {"js_std is the population standard deviation of the 10 pairwise JS distances",
                "starred means all 10 pairwise two-sample KS tests are significant at alpha/10"};
  return j.dump(2) + "\n";
}

std::string render_csv(const RunResult& r) {
  std::string out = "metric";
  for (const auto& mo : r.models) out += "," + mo.model.name;
  out += '\n';
  char buf[64];
  for (Network net : kNetworks) {
    out += "I_" + std::string(network_name(net));
    for (const auto& mo : r.models) {
      const auto& nr = mo.report.networks[static_cast<std::size_t>(net)];
      if (!nr.available) {
        out += ",NA";
        continue;
      }
      std::snprintf(buf, sizeof buf, ",%s%.4f (%.4f)", nr.ks.starred ? "*" : "", nr.I, nr.js_std);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string render_curves(const RunResult& r) {
  std::string out = "model,network,class,x,mean_hit,sigmoid,g,s\n";
  for (const auto& mo : r.models) {
    for (Network net : kNetworks) {
      for (std::size_t cls = 0; cls <= kWeightClasses; ++cls) {
        const std::size_t c = cls == 0 ? 0 : cell_index(net, cls);
        const auto& curve = mo.attraction.curves[c];
        if (curve.valid == 0) continue;
        const auto samples = sample_curve(curve.mean_hit);
        for (std::size_t k = 0; k < samples.x.size(); ++k)
          out += mo.model.name + "," + std::string(network_name(net)) + "," + cell_label(c) + "," +
                 format_double(samples.x[k]) + "," + format_double(samples.mean_hit[k]) + "," +
                 format_double(samples.sigmoid[k]) + "," + format_double(samples.fit.g) + "," +
                 format_double(samples.fit.s) + "\n";
      }
    }
  }
  return out;
}

}  // namespace

std::string render_report(const RunResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: return render_json(result);
    case ReportFormat::csv: return render_csv(result);
    case ReportFormat::curves: return render_curves(result);
  }
  return {};
}

fs::path emit_report(const RunResult& result, ReportFormat format, const fs::path& dir) {
  fs::path p;
  switch (format) {
    case ReportFormat::json: p = dir / "report.json"; break;
    case ReportFormat::csv: p = dir / "report.csv"; break;
    case ReportFormat::curves: p = dir / "curves.csv"; break;
  }
  io::write_atomic(p, render_report(result, format));
  return p;
}

}  // namespace nprox
