#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nprox/graph.hpp"
#include "nprox/io.hpp"
#include "nprox/pipeline.hpp"
#include "nprox/random.hpp"

namespace fs = std::filesystem;
using namespace nprox;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct SynthArgs {
  SynthParams params;
  std::uint64_t seed = 0;
  fs::path out = "synth";
};

struct IngestArgs {
  std::string source = "playlists";
  fs::path input;
  FilterConfig filters;
  std::size_t min_count = 2;
  bool normalize = false;
  bool normalize_set = false;
  fs::path out = "ingest";
};

struct PpmiArgs {
  fs::path counts, vocab, labels;
  double max_removal_fraction = 0.5;
  bool diagnostics = false;
  fs::path out = "ppmi";
};

struct ProximityArgs {
  fs::path matrix;
  double threshold = 0.0;
  std::string masking = "prose";
  fs::path out = "stack";
};

struct EmbedArgs {
  fs::path matrix, vocab, output = "embedding.txt";
  std::string kind = "svd";
  std::string preset;
  ModelConfig model;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct AttractionArgs {
  fs::path stack, embedding, vocab, output = "attraction.csv";
  std::size_t w0_cap = 5000;
  bool exact_w0 = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct InterpretArgs {
  std::vector<std::string> inputs;  // name=path.csv
  fs::path vocab, out = "report";
  double alpha = 0.05;
};

struct RunArgs {
  fs::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> output, cache_dir;
  std::optional<std::size_t> threads;
};

ModelKind parse_kind(const std::string& s) {
  if (s == "svd") return ModelKind::svd;
  if (s == "deepwalk") return ModelKind::deepwalk;
  if (s == "node2vec") return ModelKind::node2vec;
  if (s == "random") return ModelKind::random;
  throw ConfigError("unknown model kind '" + s + "'");
}

int do_synth(const SynthArgs& a) {
  auto params = a.params;
  params.seed = derive_seed(a.seed, "synth");
  const auto synth = synth_corpus(params);
  fs::create_directories(a.out);
  io::write_playlists(a.out / "playlists.txt", synth.corpus);
  std::vector<std::pair<std::string, std::uint32_t>> labels(synth.community.begin(), synth.community.end());
  std::sort(labels.begin(), labels.end());
  std::string s;
  for (const auto& [item, c] : labels) s += item + "\tc" + std::to_string(c) + "\n";
  io::write_atomic(a.out / "labels.tsv", s);
  std::printf("%zu groups, %zu items\n", synth.corpus.groups.size(), labels.size());
  return kExitOk;
}

int do_ingest(const IngestArgs& a) {
  GroupedCorpus corpus;
  bool normalize = a.normalize;
  if (a.source == "logs") {
    auto rep = sessionize_with_report(io::read_event_log(a.input), a.filters.gap, a.filters.skip);
    if (rep.missing_durations > 0)
      std::cerr << "warning: " << rep.missing_durations << " events without duration kept\n";
    corpus = std::move(rep.corpus);
    if (a.filters.min_owner_groups > 0) corpus = filter_active_owners(corpus, a.filters.min_owner_groups);
    if (!a.normalize_set) normalize = true;
  } else if (a.source == "playlists") {
    corpus = clean_playlists(io::read_playlists(a.input), a.filters.min_unique, a.filters.sigma_mult);
  } else {
    throw ConfigError("source must be 'logs' or 'playlists'");
  }
  const auto counts = build_cooccurrence(corpus, normalize, a.min_count);
  fs::create_directories(a.out);
  io::write_triplets(a.out / "counts.tsv", counts.matrix);
  io::write_vocab(a.out / "vocab.tsv", counts.vocab);
  std::printf("%zu groups, %zu nodes, %zu edges\n", corpus.groups.size(), counts.vocab.size(),
              counts.matrix.edge_count());
  return kExitOk;
}

int do_ppmi(const PpmiArgs& a) {
  const auto counts = io::read_triplets(a.counts);
  const auto vocab = io::read_vocab(a.vocab);
  if (vocab.size() != counts.dimension()) throw ConfigError("vocabulary size does not match the counts");
  const auto s = ppmi_transform(counts);
  const auto f = low_degree_filter(s, a.max_removal_fraction);
  const auto kept_vocab = vocab.subset(f.kept);
  fs::create_directories(a.out);
  io::write_triplets(a.out / "S.tsv", f.matrix);
  io::write_vocab(a.out / "S_vocab.tsv", kept_vocab);

  nlohmann::ordered_json j;
  j["nodes_before_filter"] = s.dimension();
  j["gamma"] = f.gamma;
  j["nodes"] = f.matrix.dimension();
  j["edges"] = f.matrix.edge_count();
  if (!a.labels.empty()) {
    const auto before = io::read_labels(a.labels, vocab);
    const auto after = io::read_labels(a.labels, kept_vocab);
    j["modularity_before"] = modularity(LabeledGraph{s, before}, true);
    j["modularity_after"] = modularity(LabeledGraph{f.matrix, after}, true);
  }
  if (a.diagnostics) {
    const auto rep = component_report(f.matrix);
    j["components"] = rep.sizes.size();
    j["largest_component"] = rep.largest_size;
    j["average_shortest_path"] = rep.average_shortest_path;
  }
  io::write_atomic(a.out / "summary.json", j.dump(2) + "\n");
  std::printf("%s\n", j.dump(2).c_str());
  return kExitOk;
}

int do_proximity(const ProximityArgs& a) {
  StackOptions opts;
  opts.threshold = a.threshold;
  if (a.masking == "prose") opts.masking = MaskingRule::prose;
  else if (a.masking == "formula") opts.masking = MaskingRule::formula;
  else throw ConfigError("masking must be 'prose' or 'formula'");
  const auto stack = build_stack(io::read_triplets(a.matrix), opts);
  io::write_stack(a.out, stack);
  for (Network net : kNetworks) {
    const auto n = static_cast<std::size_t>(net);
    std::printf("%s: %zu edges, class means", std::string(network_name(net)).c_str(),
                stack.network(net).edge_count());
    for (double m : stack.classes[n].class_means) std::printf(" %.6g", m);
    std::printf("\n");
  }
  return kExitOk;
}

int do_embed(EmbedArgs a) {
  const auto s = io::read_triplets(a.matrix);
  const auto vocab = io::read_vocab(a.vocab);
  if (vocab.size() != s.dimension()) throw ConfigError("vocabulary size does not match the matrix");
  auto& m = a.model;
  if (!a.preset.empty()) {
    auto preset = node2vec_preset(a.preset);
    m.p = preset.p;
    m.q = preset.q;
    a.kind = "node2vec";
  }
  m.kind = parse_kind(a.kind);
  EmbeddingMatrix e;
  switch (m.kind) {
    case ModelKind::svd: e = svd_embed(s, std::min(m.dim, s.dimension()), a.seed); break;
    case ModelKind::random: e = random_embedding(s.dimension(), m.dim, a.seed); break;
    default: {
      const auto strategy = m.kind == ModelKind::deepwalk ? WalkStrategy::uniform()
                                                          : WalkStrategy::node2vec(m.p, m.q);
      const auto walks = generate_walks(s, strategy, m.walks_per_node, m.walk_length,
                                        derive_seed(a.seed, "walks"), a.threads);
      m.sgns.dim = m.dim;
      m.sgns.seed = derive_seed(a.seed, "sgns");
      const auto res = train_sgns(walks, s.dimension(), m.sgns);
      for (std::size_t i = 0; i < res.epoch_losses.size(); ++i)
        std::fprintf(stderr, "epoch %zu loss %.6f\n", i + 1, res.epoch_losses[i]);
      e = res.embedding;
    }
  }
  if (!e.finite()) throw std::runtime_error("embedding contains non-finite values");
  store_embedding(a.output, e, vocab);
  return kExitOk;
}

int do_attraction(const AttractionArgs& a) {
  const auto stack = io::read_stack(a.stack);
  const auto vocab = io::read_vocab(a.vocab);
  if (vocab.size() != stack.dimension()) throw ConfigError("vocabulary size does not match the stack");
  const auto e = load_embedding(a.embedding, vocab);
  const auto idx = build_distance_index(e, a.threads);
  AttractionOptions opts;
  opts.w0_cap = a.w0_cap;
  opts.exact_w0 = a.exact_w0;
  opts.seed = derive_seed(a.seed, "w0");
  opts.threads = a.threads;
  const auto res = compute_attraction(idx, stack, opts);
  io::write_attraction_csv(a.output, res.records, vocab);
  std::printf("null delta %.6f\n", res.null.delta);
  return kExitOk;
}

int do_interpret(const InterpretArgs& a) {
  const auto vocab = io::read_vocab(a.vocab);
  RunResult result;
  result.vocab = vocab;
  std::string digest;
  for (const auto& spec : a.inputs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("expected name=path, got '" + spec + "'");
    const fs::path path = spec.substr(eq + 1);
    if (!fs::exists(path)) throw ConfigError("attraction file not found: " + path.string());
    ModelOutcome mo;
    mo.model.name = spec.substr(0, eq);
    mo.model.kind = ModelKind::import;
    mo.attraction.records = io::read_attraction_csv(path, vocab);
    // The null attraction is implied by any finite (delta, delta_dot) pair.
    for (const auto& r : mo.attraction.records)
      if (std::isfinite(r.delta) && std::isfinite(r.delta_dot) && r.delta > 0) {
        mo.attraction.null.delta = r.delta / std::exp2(r.delta_dot);
        break;
      }
    mo.report = interpret(mo.model.name, mo.attraction, a.alpha);
    digest += mo.model.name + "|" + sha256_hex(io::read_file(path)) + "|";
    result.models.push_back(std::move(mo));
  }
  if (result.models.size() >= 2) {
    std::vector<InterpretabilityReport> reports;
    for (const auto& mo : result.models) reports.push_back(mo.report);
    try {
      result.ranking = rank_models(reports);
    } catch (const std::invalid_argument& e) {
      std::cerr << "warning: no ranking: " << e.what() << "\n";
    }
  }
  result.config_digest = sha256_hex(digest + io::format_double(a.alpha));
  fs::create_directories(a.out);
  emit_report(result, ReportFormat::json, a.out);
  const auto csv = emit_report(result, ReportFormat::csv, a.out);
  std::printf("%s", io::read_file(csv).c_str());
  return kExitOk;
}

int do_run(const RunArgs& a) {
  if (!fs::exists(a.config)) throw ConfigError("config file not found: " + a.config.string());
  auto overrides = a.overrides;
  if (a.seed) overrides.push_back("seed=" + std::to_string(*a.seed));
  if (a.threads) overrides.push_back("evaluation.threads=" + std::to_string(*a.threads));
  auto cfg = load_config_file(a.config, overrides);
  if (a.output) cfg.output_dir = *a.output;
  if (a.cache_dir) cfg.cache_dir = *a.cache_dir;
  const auto result = run_pipeline(cfg);
  for (const auto& [stage, hit] : result.cache_hits)
    std::fprintf(stderr, "%-24s %s\n", stage.c_str(), hit ? "cached" : "computed");
  std::printf("%s", render_report(result, ReportFormat::csv).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretability of node embedding distances against proximity networks"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* sc = app.add_subcommand("synth", "Generate a planted-community playlist corpus");
  sc->add_option("--communities", synth.params.communities)->check(CLI::PositiveNumber);
  sc->add_option("--nodes-per-community", synth.params.nodes_per_community)->check(CLI::PositiveNumber);
  sc->add_option("--groups", synth.params.groups)->check(CLI::PositiveNumber);
  sc->add_option("--intra-prob", synth.params.intra_prob)->check(CLI::Range(0.0, 1.0));
  sc->add_option("--min-group-size", synth.params.min_group_size);
  sc->add_option("--max-group-size", synth.params.max_group_size);
  sc->add_option("--seed", synth.seed)->required();
  sc->add_option("-o,--out-dir", synth.out);

  IngestArgs ingest;
  auto* ic = app.add_subcommand("ingest", "Build co-occurrence counts from logs or playlists");
  ic->add_option("--source", ingest.source)->check(CLI::IsMember({"logs", "playlists"}));
  ic->add_option("-i,--input", ingest.input)->required()->check(CLI::ExistingFile);
  ic->add_option("--gap", ingest.filters.gap);
  ic->add_option("--skip", ingest.filters.skip);
  ic->add_option("--min-unique", ingest.filters.min_unique);
  ic->add_option("--sigma-mult", ingest.filters.sigma_mult);
  ic->add_option("--min-owner-groups", ingest.filters.min_owner_groups);
  ic->add_option("--min-count", ingest.min_count);
  auto* norm = ic->add_flag("--normalize,!--no-normalize", ingest.normalize, "Per-owner normalization");
  ic->add_option("-o,--out-dir", ingest.out);

  PpmiArgs ppmi;
  auto* pc = app.add_subcommand("ppmi", "PPMI transform and low-degree filter; writes S.tsv, S_vocab.tsv, summary.json");
  pc->add_option("--counts", ppmi.counts)->required()->check(CLI::ExistingFile);
  pc->add_option("--vocab", ppmi.vocab)->required()->check(CLI::ExistingFile);
  pc->add_option("--labels", ppmi.labels)->check(CLI::ExistingFile);
  pc->add_option("--max-removal-fraction", ppmi.max_removal_fraction)->check(CLI::Range(0.0, 1.0));
  pc->add_flag("--diagnostics", ppmi.diagnostics);
  pc->add_option("-o,--out-dir", ppmi.out);

  ProximityArgs prox;
  auto* xc = app.add_subcommand("proximity", "Build the S, P, H stack with weight classes");
  xc->add_option("--matrix", prox.matrix)->required()->check(CLI::ExistingFile);
  xc->add_option("--threshold", prox.threshold)->check(CLI::Range(0.0, 1.0));
  xc->add_option("--masking", prox.masking)->check(CLI::IsMember({"prose", "formula"}));
  xc->add_option("-o,--out-dir", prox.out);

  EmbedArgs embed;
  auto* ec = app.add_subcommand("embed", "Embed a PPMI network");
  ec->add_option("--matrix", embed.matrix)->required()->check(CLI::ExistingFile);
  ec->add_option("--vocab", embed.vocab)->required()->check(CLI::ExistingFile);
  ec->add_option("--model", embed.kind)->check(CLI::IsMember({"svd", "deepwalk", "node2vec", "random"}));
  ec->add_option("--preset", embed.preset)->check(CLI::IsMember({"sess", "pl"}));
  ec->add_option("--dim", embed.model.dim)->check(CLI::PositiveNumber);
  ec->add_option("--walk-length", embed.model.walk_length)->check(CLI::PositiveNumber);
  ec->add_option("--walks-per-node", embed.model.walks_per_node)->check(CLI::PositiveNumber);
  ec->add_option("-p", embed.model.p)->check(CLI::PositiveNumber);
  ec->add_option("-q", embed.model.q)->check(CLI::PositiveNumber);
  ec->add_option("--window", embed.model.sgns.window)->check(CLI::PositiveNumber);
  ec->add_option("--negatives", embed.model.sgns.negatives);
  ec->add_option("--epochs", embed.model.sgns.epochs)->check(CLI::PositiveNumber);
  ec->add_option("--learning-rate", embed.model.sgns.initial_learning_rate)->check(CLI::PositiveNumber);
  ec->add_option("--threads", embed.threads);
  ec->add_option("--seed", embed.seed)->required();
  ec->add_option("-o,--output", embed.output);

  AttractionArgs attr;
  auto* ac = app.add_subcommand("attraction", "Attraction records for one embedding");
  ac->add_option("--stack", attr.stack)->required()->check(CLI::ExistingDirectory);
  ac->add_option("--embedding", attr.embedding)->required()->check(CLI::ExistingFile);
  ac->add_option("--vocab", attr.vocab)->required()->check(CLI::ExistingFile);
  ac->add_option("--w0-cap", attr.w0_cap)->check(CLI::PositiveNumber);
  ac->add_flag("--exact-w0", attr.exact_w0);
  ac->add_option("--threads", attr.threads);
  ac->add_option("--seed", attr.seed)->required();
  ac->add_option("-o,--output", attr.output);

  InterpretArgs interp;
  auto* nc = app.add_subcommand("interpret", "Interpretability scores from attraction CSVs");
  nc->add_option("inputs", interp.inputs, "name=attraction.csv")->required();
  nc->add_option("--vocab", interp.vocab)->required()->check(CLI::ExistingFile);
  nc->add_option("--alpha", interp.alpha)->check(CLI::Range(0.0, 1.0));
  nc->add_option("-o,--out-dir", interp.out);

  RunArgs run;
  auto* rc = app.add_subcommand("run", "Run the full pipeline from a config file");
  rc->add_option("-c,--config", run.config)->required();
  rc->add_option("--set", run.overrides, "Override a config key: dotted.key=value");
  rc->add_option("--seed", run.seed);
  rc->add_option("-o,--output", run.output);
  rc->add_option("--cache-dir", run.cache_dir);
  rc->add_option("--threads", run.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  ingest.normalize_set = norm->count() > 0;

  try {
    if (*sc) return do_synth(synth);
    if (*ic) return do_ingest(ingest);
    if (*pc) return do_ppmi(ppmi);
    if (*xc) return do_proximity(prox);
    if (*ec) return do_embed(embed);
    if (*ac) return do_attraction(attr);
    if (*nc) return do_interpret(interp);
    if (*rc) return do_run(run);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
