#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nprox/attraction.hpp"
#include "nprox/embed.hpp"
#include "nprox/graph.hpp"
#include "nprox/ingest.hpp"
#include "nprox/interp.hpp"
#include "nprox/pipeline.hpp"
#include "nprox/proximity.hpp"

namespace py = pybind11;
using namespace nprox;

namespace {

using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using WeightArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

SparseSymmetricMatrix matrix_from_arrays(std::size_t n, const IndexArray& i, const IndexArray& j,
                                         const WeightArray& w) {
  if (i.size() != j.size() || i.size() != w.size())
    throw std::invalid_argument("i, j and weight arrays must have the same length");
  std::vector<Triplet> t(static_cast<std::size_t>(i.size()));
  auto ii = i.unchecked<1>();
  auto jj = j.unchecked<1>();
  auto ww = w.unchecked<1>();
  for (py::ssize_t k = 0; k < i.size(); ++k) {
    if (ii(k) < 0 || jj(k) < 0) throw std::invalid_argument("negative node index");
    t[static_cast<std::size_t>(k)] = {static_cast<NodeId>(ii(k)), static_cast<NodeId>(jj(k)), ww(k)};
  }
  return SparseSymmetricMatrix::from_triplets(n, t);
}

py::tuple matrix_to_arrays(const SparseSymmetricMatrix& m) {
  const auto t = m.triplets();
  py::array_t<std::int64_t> i(static_cast<py::ssize_t>(t.size())), j(static_cast<py::ssize_t>(t.size()));
  py::array_t<double> w(static_cast<py::ssize_t>(t.size()));
  auto ii = i.mutable_unchecked<1>();
  auto jj = j.mutable_unchecked<1>();
  auto ww = w.mutable_unchecked<1>();
  for (std::size_t k = 0; k < t.size(); ++k) {
    ii(static_cast<py::ssize_t>(k)) = t[k].i;
    jj(static_cast<py::ssize_t>(k)) = t[k].j;
    ww(static_cast<py::ssize_t>(k)) = t[k].weight;
  }
  return py::make_tuple(i, j, w);
}

EmbeddingMatrix as_embedding(const Eigen::MatrixXd& m) {
  EmbeddingMatrix e;
  e.vectors = m;
  return e;
}

py::dict records_to_dict(const std::vector<AttractionRecord>& recs) {
  const auto n = static_cast<py::ssize_t>(recs.size());
  py::array_t<std::int64_t> target(n), network(n), cls(n), size(n);
  py::array_t<double> g(n), s(n), residual(n), delta(n), delta_dot(n);
  py::array_t<bool> valid(n);
  for (py::ssize_t k = 0; k < n; ++k) {
    const auto& r = recs[static_cast<std::size_t>(k)];
    target.mutable_at(k) = r.target;
    network.mutable_at(k) = r.network ? static_cast<std::int64_t>(*r.network) : -1;
    cls.mutable_at(k) = r.weight_class;
    size.mutable_at(k) = static_cast<std::int64_t>(r.size);
    g.mutable_at(k) = r.fit.g;
    s.mutable_at(k) = r.fit.s;
    residual.mutable_at(k) = r.fit.residual;
    delta.mutable_at(k) = r.delta;
    delta_dot.mutable_at(k) = r.delta_dot;
    valid.mutable_at(k) = r.valid;
  }
  py::dict d;
  d["target"] = target;
  d["network"] = network;
  d["class"] = cls;
  d["size"] = size;
  d["g"] = g;
  d["s"] = s;
  d["residual"] = residual;
  d["delta"] = delta;
  d["delta_dot"] = delta_dot;
  d["valid"] = valid;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nprox, m) {
  m.doc() = "Native core of nprox.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SparseSymmetricMatrix>(m, "SparseSymmetricMatrix")
      .def(py::init(&matrix_from_arrays), py::arg("n"), py::arg("i"), py::arg("j"), py::arg("weight"))
      .def_property_readonly("dimension", &SparseSymmetricMatrix::dimension)
      .def_property_readonly("edge_count", &SparseSymmetricMatrix::edge_count)
      .def("at", &SparseSymmetricMatrix::at)
      .def("degree", &SparseSymmetricMatrix::degree)
      .def("total_weight", &SparseSymmetricMatrix::total_weight)
      .def("triplets", &matrix_to_arrays, "Canonical (i, j, weight) arrays with i < j.")
      .def("__eq__", [](const SparseSymmetricMatrix& a, const SparseSymmetricMatrix& b) { return a == b; })
      .def("__repr__", [](const SparseSymmetricMatrix& s) {
        return "<SparseSymmetricMatrix n=" + std::to_string(s.dimension()) +
               " edges=" + std::to_string(s.edge_count()) + ">";
      });

  m.def(
      "cooccurrence",
      [](const std::vector<std::vector<std::string>>& groups, const std::vector<std::string>& owners,
         bool per_owner_normalize, std::size_t min_count) {
        GroupedCorpus c;
        for (std::size_t k = 0; k < groups.size(); ++k)
          c.groups.push_back({owners.empty() ? "g" + std::to_string(k) : owners.at(k), groups[k]});
        auto counts = build_cooccurrence(deduplicate(c), per_owner_normalize, min_count);
        return py::make_tuple(std::move(counts.matrix), counts.vocab.items());
      },
      py::arg("groups"), py::arg("owners") = std::vector<std::string>{}, py::arg("per_owner_normalize") = false,
      py::arg("min_count") = 2, "Counts co-occurring pairs; returns (matrix, vocabulary items).");

  m.def(
      "synth_corpus",
      [](std::size_t communities, std::size_t nodes_per_community, std::size_t groups, double intra_prob,
         std::uint64_t seed) {
        SynthParams p;
        p.communities = communities;
        p.nodes_per_community = nodes_per_community;
        p.groups = groups;
        p.intra_prob = intra_prob;
        p.seed = seed;
        const auto sc = synth_corpus(p);
        std::vector<std::vector<std::string>> out;
        for (const auto& g : sc.corpus.groups) out.push_back(g.items);
        std::map<std::string, std::size_t> community(sc.community.begin(), sc.community.end());
        return py::make_tuple(out, community);
      },
      py::arg("communities") = 4, py::arg("nodes_per_community") = 125, py::arg("groups") = 20000,
      py::arg("intra_prob") = 0.9, py::arg("seed") = 0, "Planted-community corpus: (groups, item -> community).");

  m.def("ppmi", &ppmi_transform, py::arg("counts"));
  m.def(
      "degree_filter",
      [](const SparseSymmetricMatrix& g, double frac) {
        auto r = low_degree_filter(g, frac);
        return py::make_tuple(std::move(r.matrix), r.gamma, r.kept);
      },
      py::arg("matrix"), py::arg("max_removal_fraction") = 0.5, "Returns (matrix, gamma, kept indices).");
  m.def("connected_components", &connected_components);
  m.def(
      "modularity",
      [](const SparseSymmetricMatrix& g, const std::vector<std::int32_t>& labels) {
        return modularity({g, labels}, false);
      },
      py::arg("matrix"), py::arg("labels"));

  py::class_<ProximityStack>(m, "ProximityStack")
      .def_readonly("S", &ProximityStack::s)
      .def_readonly("P", &ProximityStack::p)
      .def_readonly("H", &ProximityStack::h)
      .def_property_readonly("dimension", &ProximityStack::dimension)
      .def(
          "class_of",
          [](const ProximityStack& st, const std::string& net, NodeId i, NodeId j) {
            return st.class_of(parse_network(net), i, j);
          },
          py::arg("network"), py::arg("i"), py::arg("j"));
  m.def(
      "build_stack",
      [](const SparseSymmetricMatrix& s, double threshold, const std::string& masking) {
        StackOptions o;
        o.threshold = threshold;
        if (masking == "formula") o.masking = MaskingRule::formula;
        else if (masking != "prose") throw std::invalid_argument("masking must be 'prose' or 'formula'");
        return build_stack(s, o);
      },
      py::arg("s"), py::arg("threshold") = 0.0, py::arg("masking") = "prose");
  m.def(
      "kmeans_1d",
      [](const std::vector<double>& w, std::size_t k) {
        const auto r = kmeans_1d_segment(w, k);
        return py::make_tuple(r.assignment, r.centroids, r.sse);
      },
      py::arg("weights"), py::arg("k") = 4);

  m.def(
      "svd_embed",
      [](const SparseSymmetricMatrix& s, std::size_t dim, std::uint64_t seed) {
        return svd_embed(s, dim, seed).vectors;
      },
      py::arg("s"), py::arg("dim"), py::arg("seed") = 0);
  m.def(
      "walk_embed",
      [](const SparseSymmetricMatrix& s, std::size_t dim, double p, double q, std::size_t walk_length,
         std::size_t walks_per_node, std::size_t window, std::size_t negatives, std::size_t epochs,
         std::uint64_t seed, std::size_t threads) {
        const auto strategy = (p == 1.0 && q == 1.0) ? WalkStrategy::uniform() : WalkStrategy::node2vec(p, q);
        WalkCorpus walks;
        SgnsResult res;
        {
          py::gil_scoped_release release;
          walks = generate_walks(s, strategy, walks_per_node, walk_length, seed, threads);
          SgnsConfig cfg;
          cfg.dim = dim;
          cfg.window = window;
          cfg.negatives = negatives;
          cfg.epochs = epochs;
          cfg.seed = seed;
          cfg.threads = threads;
          res = train_sgns(walks, s.dimension(), cfg);
        }
        return py::make_tuple(res.embedding.vectors, res.epoch_losses);
      },
      py::arg("s"), py::arg("dim") = 128, py::arg("p") = 1.0, py::arg("q") = 1.0, py::arg("walk_length") = 20,
      py::arg("walks_per_node") = 10, py::arg("window") = 10, py::arg("negatives") = 5, py::arg("epochs") = 100,
      py::arg("seed") = 0, py::arg("threads") = 1,
      "DeepWalk (p = q = 1) or node2vec embedding; returns (vectors, epoch losses).");
  m.def(
      "random_embedding", [](std::size_t n, std::size_t d, std::uint64_t seed) { return random_embedding(n, d, seed).vectors; },
      py::arg("n"), py::arg("dim"), py::arg("seed") = 0);

  m.def("fit_sigmoid", [](const std::vector<double>& h) {
    const auto f = fit_sigmoid(h);
    py::dict d;
    d["g"] = f.g;
    d["s"] = f.s;
    d["residual"] = f.residual;
    d["converged"] = f.converged;
    d["iterations"] = f.iterations;
    return d;
  });
  m.def("delta_integral", py::overload_cast<double, double>(&delta_integral), py::arg("g"), py::arg("s"));
  m.def("normalize_delta", &normalize_delta, py::arg("delta"), py::arg("null"));
  m.def(
      "attraction",
      [](const Eigen::MatrixXd& vectors, const ProximityStack& stack, std::uint64_t seed, std::size_t threads,
         std::size_t w0_cap) {
        AttractionResult r;
        {
          py::gil_scoped_release release;
          const auto idx = build_distance_index(as_embedding(vectors), threads);
          AttractionOptions o;
          o.seed = seed;
          o.threads = threads;
          o.w0_cap = w0_cap;
          r = compute_attraction(idx, stack, o);
        }
        auto d = records_to_dict(r.records);
        d["null_delta"] = r.null.delta;
        return d;
      },
      py::arg("vectors"), py::arg("stack"), py::arg("seed") = 0, py::arg("threads") = 1, py::arg("w0_cap") = 5000,
      "Per-target attraction records as column arrays; network is -1 for the W0 control.");

  m.def(
      "js_distance",
      [](const std::vector<double>& p, const std::vector<double>& q) { return js_distance(p, q); });
  m.def(
      "interpretability",
      [](const std::vector<double>& delta_dot, const std::vector<std::int64_t>& network,
         const std::vector<std::int64_t>& cls, double alpha) {
        if (delta_dot.size() != network.size() || delta_dot.size() != cls.size())
          throw std::invalid_argument("delta_dot, network and class must have the same length");
        std::vector<AttractionRecord> recs(delta_dot.size());
        for (std::size_t k = 0; k < recs.size(); ++k) {
          recs[k].valid = std::isfinite(delta_dot[k]);
          recs[k].delta_dot = delta_dot[k];
          if (network[k] >= 0) recs[k].network = static_cast<Network>(network[k]);
          recs[k].weight_class = static_cast<std::uint8_t>(cls[k]);
        }
        py::dict out;
        for (Network n : kNetworks) {
          const auto rep = interpret_network(recs, n, alpha);
          py::dict d;
          d["available"] = rep.available;
          d["reason"] = rep.reason;
          d["I"] = rep.available ? py::cast(rep.I) : py::none();
          d["js"] = std::vector<double>(rep.js.begin(), rep.js.end());
          d["starred"] = rep.ks.starred;
          out[py::str(std::string(network_name(n)))] = d;
        }
        return out;
      },
      py::arg("delta_dot"), py::arg("network"), py::arg("weight_class"), py::arg("alpha") = 0.05,
      "I score per network from attraction columns.");

  m.def(
      "run_config",
      [](const std::string& yaml_text, const std::filesystem::path& base_dir, const std::vector<std::string>& overrides) {
        const auto cfg = load_config(yaml_text, base_dir, overrides);
        RunResult res;
        {
          py::gil_scoped_release release;
          res = run_pipeline(cfg);
        }
        return py::make_tuple(render_report(res, ReportFormat::json), render_report(res, ReportFormat::csv));
      },
      py::arg("yaml_text"), py::arg("base_dir") = std::filesystem::path("."),
      py::arg("overrides") = std::vector<std::string>{},
      "Runs the full pipeline, writing reports to output_dir; returns (json text, csv text).");
}
