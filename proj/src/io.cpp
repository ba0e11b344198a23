#include "nprox/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nprox::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
T parse(std::string_view s, const std::string& where) {
  T v{};
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(where + ": cannot parse '" + std::string(s) + "'");
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

std::string at_line(const fs::path& path, std::size_t lineno) {
  return path.string() + ":" + std::to_string(lineno);
}

}  // namespace

void write_triplets(const fs::path& path, const SparseSymmetricMatrix& m) {
  std::string out = "# dim " + std::to_string(m.dimension()) + "\n";
  m.for_each_edge([&](NodeId i, NodeId j, double w) {
    out += std::to_string(i) + '\t' + std::to_string(j) + '\t' + format_double(w) + '\n';
  });
  write_atomic(path, out);
}

SparseSymmetricMatrix read_triplets(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> dim;
  std::vector<Triplet> trip;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      if (sv.starts_with("# dim ")) dim = parse<std::size_t>(sv.substr(6), at_line(path, lineno));
      continue;
    }
    auto f = split(sv, '\t');
    if (f.size() != 3) throw std::runtime_error(at_line(path, lineno) + ": expected 3 columns");
    const auto where = at_line(path, lineno);
    trip.push_back({parse<NodeId>(f[0], where), parse<NodeId>(f[1], where), parse<double>(f[2], where)});
  }
  if (!dim) {
    std::size_t n = 0;
    for (const auto& t : trip) n = std::max<std::size_t>({n, t.i + 1u, t.j + 1u});
    dim = n;
  }
  return SparseSymmetricMatrix::from_triplets(*dim, trip);
}

void write_vocab(const fs::path& path, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    out += std::to_string(i) + '\t' + vocab.item(static_cast<NodeId>(i)) + '\n';
  write_atomic(path, out);
}

Vocabulary read_vocab(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> items;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty()) continue;
    auto f = split(sv, '\t');
    if (f.size() != 2) throw std::runtime_error(at_line(path, lineno) + ": expected 'index<TAB>item-id'");
    if (parse<std::size_t>(f[0], at_line(path, lineno)) != items.size())
      throw std::runtime_error(at_line(path, lineno) + ": indices must be consecutive from 0");
    items.emplace_back(f[1]);
  }
  return Vocabulary(std::move(items));
}

EventLog read_event_log(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  EventLog log;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto f = split(sv, '\t');
    const auto where = at_line(path, lineno);
    if (f.size() != 3 && f.size() != 4)
      throw std::runtime_error(where + ": expected owner, timestamp, item[, duration]");
    Event e;
    e.owner = std::string(f[0]);
    e.timestamp = parse<double>(f[1], where);
    e.item = std::string(trim(f[2]));
    if (f.size() == 4 && !trim(f[3]).empty()) e.duration = parse<double>(f[3], where);
    if (e.item.empty()) throw std::runtime_error(where + ": empty item-id");
    log.push_back(std::move(e));
  }
  return log;
}

void write_event_log(const fs::path& path, const EventLog& log) {
  std::string out;
  for (const auto& e : log) {
    out += e.owner + '\t' + format_double(e.timestamp) + '\t' + e.item;
    if (e.duration) out += '\t' + format_double(*e.duration);
    out += '\n';
  }
  write_atomic(path, out);
}

GroupedCorpus read_playlists(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  GroupedCorpus corpus{{}, CorpusKind::playlist};
  while (std::getline(is, line)) {
    ++lineno;
    Group g;
    g.owner = "line" + std::to_string(lineno);
    std::istringstream ss(line);
    std::string item;
    while (ss >> item) g.items.push_back(item);
    if (!g.items.empty()) corpus.groups.push_back(std::move(g));
  }
  return corpus;
}

void write_playlists(const fs::path& path, const GroupedCorpus& corpus) {
  std::string out;
  for (const auto& g : corpus.groups) {
    for (std::size_t i = 0; i < g.items.size(); ++i) out += (i ? " " : "") + g.items[i];
    out += '\n';
  }
  write_atomic(path, out);
}

std::vector<std::int32_t> read_labels(const fs::path& path, const Vocabulary& vocab,
                                      std::vector<std::string>* label_names) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<NodeId, std::string>> pairs;
  std::map<std::string, std::int32_t> ids;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto f = split(sv, '\t');
    if (f.size() != 2) throw std::runtime_error(at_line(path, lineno) + ": expected 'item-id<TAB>label'");
    auto idx = vocab.find(std::string(f[0]));
    if (!idx) continue;
    pairs.emplace_back(*idx, std::string(f[1]));
    ids.emplace(std::string(f[1]), 0);
  }
  std::int32_t next = 0;
  for (auto& [name, id] : ids) id = next++;
  if (label_names) {
    label_names->clear();
    for (const auto& [name, id] : ids) label_names->push_back(name);
  }
  std::vector<std::int32_t> labels(vocab.size(), -1);
  for (const auto& [node, name] : pairs) labels[node] = ids[name];
  return labels;
}

void write_stack(const fs::path& dir, const ProximityStack& stack) {
  fs::create_directories(dir);
  write_triplets(dir / "S.tsv", stack.s);
  write_triplets(dir / "P.tsv", stack.p);
  write_triplets(dir / "H.tsv", stack.h);
  std::string out;
  for (Network net : kNetworks) {
    const auto& g = stack.network(net);
    g.for_each_edge([&](NodeId i, NodeId j, double) {
      out += std::to_string(i) + '\t' + std::to_string(j) + '\t' + std::string(network_name(net)) +
             '\t' + std::to_string(stack.class_of(net, i, j)) + '\n';
    });
  }
  write_atomic(dir / "classes.tsv", out);
}

ProximityStack read_stack(const fs::path& dir) {
  ProximityStack stack;
  stack.s = read_triplets(dir / "S.tsv");
  stack.p = read_triplets(dir / "P.tsv");
  stack.h = read_triplets(dir / "H.tsv");
  const auto n = stack.s.dimension();
  if (stack.p.dimension() != n || stack.h.dimension() != n)
    throw std::runtime_error(dir.string() + ": networks disagree on dimension");

  for (Network net : kNetworks) {
    const auto& g = stack.network(net);
    auto& wc = stack.classes[static_cast<std::size_t>(net)];
    wc.per_row.resize(n);
    for (NodeId i = 0; i < n; ++i) wc.per_row[i].assign(g.degree(i), 0);
  }

  const auto path = dir / "classes.tsv";
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::array<std::vector<double>, 3> sums, counts;
  std::size_t k = 0;
  std::vector<std::tuple<Network, NodeId, NodeId, std::uint8_t>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty()) continue;
    auto f = split(sv, '\t');
    const auto where = at_line(path, lineno);
    if (f.size() != 4) throw std::runtime_error(where + ": expected i, j, network, class");
    const auto net = parse_network(trim(f[2]));
    const auto cls = parse<unsigned>(f[3], where);
    if (cls < 1) throw std::runtime_error(where + ": class must be >= 1");
    rows.emplace_back(net, parse<NodeId>(f[0], where), parse<NodeId>(f[1], where),
                      static_cast<std::uint8_t>(cls));
    k = std::max<std::size_t>(k, cls);
  }
  for (auto& s : sums) s.assign(k, 0.0);
  for (auto& c : counts) c.assign(k, 0.0);
  auto set_class = [&](Network net, NodeId i, NodeId j, std::uint8_t cls, const std::string& where) {
    const auto row = stack.network(net).row(i);
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Entry& e, NodeId c) { return e.col < c; });
    if (it == row.end() || it->col != j)
      throw std::runtime_error(where + ": class for a non-edge");
    stack.classes[static_cast<std::size_t>(net)].per_row[i][static_cast<std::size_t>(it - row.begin())] = cls;
    return it->weight;
  };
  for (const auto& [net, i, j, cls] : rows) {
    const std::string where = path.string();
    const double w = set_class(net, i, j, cls, where);
    set_class(net, j, i, cls, where);
    sums[static_cast<std::size_t>(net)][cls - 1] += w;
    counts[static_cast<std::size_t>(net)][cls - 1] += 1.0;
  }
  for (Network net : kNetworks) {
    const auto ni = static_cast<std::size_t>(net);
    auto& wc = stack.classes[ni];
    if (stack.network(net).empty()) {
      wc = WeightClasses{};
      continue;
    }
    for (NodeId i = 0; i < n; ++i)
      for (auto c : wc.per_row[i])
        if (c == 0)
          throw std::runtime_error(path.string() + ": missing class for a " +
                                   std::string(network_name(net)) + " edge");
    wc.class_means.resize(k);
    for (std::size_t c = 0; c < k; ++c)
      wc.class_means[c] = counts[ni][c] > 0 ? sums[ni][c] / counts[ni][c] : 0.0;
    wc.centroids = wc.class_means;
  }
  return stack;
}

void write_attraction_csv(const fs::path& path, std::span<const AttractionRecord> records,
                          const Vocabulary& vocab) {
  std::string out = "target,network,class,size,g,s,residual,delta,delta_dot,valid\n";
  for (const auto& r : records) {
    out += vocab.item(r.target);
    out += ',';
    out += r.network ? std::string(network_name(*r.network)) : std::string("W0");
    out += ',' + std::to_string(r.weight_class) + ',' + std::to_string(r.size) + ',' +
           format_double(r.fit.g) + ',' + format_double(r.fit.s) + ',' +
           format_double(r.fit.residual) + ',' + format_double(r.delta) + ',' +
           format_double(r.delta_dot) + ',' + (r.valid ? "1" : "0") + '\n';
  }
  write_atomic(path, out);
}

std::vector<AttractionRecord> read_attraction_csv(const fs::path& path, const Vocabulary& vocab) {
  auto is = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<AttractionRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    auto sv = trim(line);
    if (sv.empty() || lineno == 1) continue;
    auto f = split(sv, ',');
    const auto where = at_line(path, lineno);
    if (f.size() != 10) throw std::runtime_error(where + ": expected 10 columns");
    AttractionRecord r;
    auto idx = vocab.find(std::string(f[0]));
    if (!idx) throw std::runtime_error(where + ": unknown item-id '" + std::string(f[0]) + "'");
    r.target = *idx;
    if (f[1] != "W0") r.network = parse_network(f[1]);
    r.weight_class = static_cast<std::uint8_t>(parse<unsigned>(f[2], where));
    r.size = parse<std::size_t>(f[3], where);
    r.fit.g = parse<double>(f[4], where);
    r.fit.s = parse<double>(f[5], where);
    r.fit.residual = parse<double>(f[6], where);
    r.delta = parse<double>(f[7], where);
    r.delta_dot = parse<double>(f[8], where);
    r.valid = parse<int>(f[9], where) != 0;
    r.fit.converged = r.valid;
    out.push_back(r);
  }
  return out;
}

}  // namespace nprox::io
