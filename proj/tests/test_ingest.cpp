#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "nprox/ingest.hpp"

using namespace nprox;

namespace {

GroupedCorpus playlists(std::vector<std::vector<std::string>> lists) {
  GroupedCorpus c;
  c.kind = CorpusKind::playlist;
  for (std::size_t k = 0; k < lists.size(); ++k) c.groups.push_back({"line" + std::to_string(k), lists[k]});
  return c;
}

// Brute-force pair counter over item ids.
std::map<std::pair<std::string, std::string>, double> count_pairs(const GroupedCorpus& c) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& g : c.groups)
    for (std::size_t a = 0; a < g.items.size(); ++a)
      for (std::size_t b = a + 1; b < g.items.size(); ++b) {
        auto x = g.items[a], y = g.items[b];
        if (y < x) std::swap(x, y);
        out[{x, y}] += 1.0;
      }
  return out;
}

}  // namespace

TEST_CASE("sessionize splits on gaps and drops singletons") {
  EventLog log{{"A", 0, "x", {}}, {"A", 600, "y", {}}, {"A", 2400, "z", {}}};
  const auto c = sessionize(log, 1200, 0);
  REQUIRE(c.groups.size() == 1);
  CHECK(c.groups[0].items == std::vector<std::string>{"x", "y"});
  CHECK(c.kind == CorpusKind::session);
}

TEST_CASE("sessionize skip filter and input validation") {
  EventLog log{{"A", 0, "x", 10.0}, {"A", 10, "y", 10.0}, {"A", 20, "z", 10.0}};
  CHECK(sessionize(log, 1200, 30).groups.empty());
  CHECK(sessionize({}, 1200, 30).groups.empty());
  EventLog bad{{"A", 0, "x", -1.0}};
  CHECK_THROWS_AS(sessionize(bad, 1200, 30), std::invalid_argument);
  CHECK_THROWS_AS(sessionize(log, 0, 30), std::invalid_argument);
  EventLog partial{{"A", 0, "x", {}}, {"A", 10, "y", 40.0}};
  const auto r = sessionize_with_report(partial, 1200, 30);
  CHECK(r.missing_durations == 1);
  CHECK(r.corpus.groups.size() == 1);
}

TEST_CASE("sessionize recovers generated sessions and ignores record order") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> item(0, 40), len(2, 6);
  std::uniform_real_distribution<double> within(1, 600), between(1300, 5000);
  EventLog log;
  std::size_t expected = 0;
  for (int o = 0; o < 3; ++o) {
    double t = 0;
    for (int s = 0; s < 50; ++s) {
      t += between(rng);
      const int n = len(rng);
      std::set<int> used;
      for (int k = 0; k < n; ++k) {
        int it = item(rng);
        while (used.count(it)) it = item(rng);
        used.insert(it);
        log.push_back({"o" + std::to_string(o), t, "i" + std::to_string(it), 100.0});
        t += within(rng);
      }
      ++expected;
    }
  }
  const auto c = sessionize(log, 1200, 30);
  CHECK(c.groups.size() == expected);
  auto shuffled = log;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto c2 = sessionize(shuffled, 1200, 30);
  REQUIRE(c2.groups.size() == c.groups.size());
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    CHECK(c.groups[g].owner == c2.groups[g].owner);
    CHECK(c.groups[g].items == c2.groups[g].items);
  }
}

TEST_CASE("clean_playlists removes length outliers and thin playlists") {
  auto c = playlists({{"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "e"},
                      {"a", "b", "c", "d", "e"}, std::vector<std::string>(1000, "z")});
  const auto out = clean_playlists(c, 2, 2.0);
  CHECK(out.groups.size() == 4);

  std::vector<std::string> nine;
  for (int i = 0; i < 9; ++i) nine.push_back("n" + std::to_string(i));
  auto ten = nine;
  ten.push_back("n9");
  const auto thin = clean_playlists(playlists({nine, ten}), 10, 100.0);
  REQUIRE(thin.groups.size() == 1);
  CHECK(thin.groups[0].items.size() == 10);

  CHECK_THROWS_WITH_AS(clean_playlists(playlists({ten}), 2, 2.0), doctest::Contains("insufficient corpus"),
                       std::runtime_error);
}

TEST_CASE("clean_playlists removes planted long outliers") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(10, 30), item(0, 5000);
  std::vector<std::vector<std::string>> lists;
  std::vector<bool> planted;
  double total = 0;
  for (int k = 0; k < 2000; ++k) {
    const int n = len(rng);
    std::vector<std::string> l;
    for (int i = 0; i < n; ++i) l.push_back("i" + std::to_string(item(rng)));
    total += n;
    lists.push_back(l);
    planted.push_back(false);
  }
  const int mean = static_cast<int>(total / 2000);
  for (int k = 0; k < 20; ++k) {
    std::vector<std::string> l;
    for (int i = 0; i < 50 * mean; ++i) l.push_back("i" + std::to_string(item(rng)));
    lists.insert(lists.begin() + 97 * k, l);
    planted.insert(planted.begin() + 97 * k, true);
  }
  const auto out = clean_playlists(playlists(lists), 2, 2.0);
  std::set<std::string> kept;
  for (const auto& g : out.groups) kept.insert(g.owner);
  std::size_t outliers_kept = 0, false_removed = 0;
  for (std::size_t k = 0; k < lists.size(); ++k) {
    const bool in = kept.count("line" + std::to_string(k)) > 0;
    if (planted[k] && in) ++outliers_kept;
    if (!planted[k] && !in) ++false_removed;
  }
  CHECK(outliers_kept == 0);
  CHECK(false_removed <= 20);
}

TEST_CASE("dedup is idempotent") {
  auto c = playlists({{"a", "b", "a", "c", "b"}});
  const auto d = deduplicate(c);
  CHECK(d.groups[0].items == std::vector<std::string>{"a", "b", "c"});
  const auto dd = deduplicate(d);
  CHECK(dd.groups[0].items == d.groups[0].items);
}

TEST_CASE("build_cooccurrence hapax rule and normalization") {
  auto c = playlists({{"a", "b"}, {"a", "b"}, {"a", "c"}});
  const auto counts = build_cooccurrence(c, false, 2);
  const auto& v = counts.vocab;
  CHECK(counts.matrix.at(v.index("a"), v.index("b")) == 2.0);
  CHECK(counts.matrix.at(v.index("a"), v.index("c")) == 0.0);

  GroupedCorpus one;
  for (int k = 0; k < 4; ++k) one.groups.push_back({"A", {"x", "y", "z"}});
  const auto norm = build_cooccurrence(one, true, 0);
  CHECK(norm.matrix.at(norm.vocab.index("x"), norm.vocab.index("y")) == doctest::Approx(1.0));
  const auto raw = build_cooccurrence(one, false, 0);
  CHECK(raw.matrix.at(raw.vocab.index("x"), raw.vocab.index("y")) == 4.0);
  CHECK_THROWS(build_cooccurrence(GroupedCorpus{}, false, 0));
}

TEST_CASE("build_cooccurrence matches a brute-force pair counter") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> item(0, 30), len(2, 8), owner(0, 4);
  for (int rep = 0; rep < 10; ++rep) {
    GroupedCorpus c;
    for (int g = 0; g < 200; ++g) {
      std::set<std::string> s;
      const int n = len(rng);
      while (static_cast<int>(s.size()) < n) s.insert("i" + std::to_string(item(rng)));
      c.groups.push_back({"o" + std::to_string(owner(rng)), {s.begin(), s.end()}});
    }
    const auto expect = count_pairs(c);
    for (std::size_t min_count : {0, 2, 3}) {
      const auto counts = build_cooccurrence(c, false, min_count);
      const auto& v = counts.vocab;
      CHECK(std::is_sorted(v.items().begin(), v.items().end()));
      std::size_t nonzero = 0;
      for (const auto& [key, n] : expect) {
        const double want = n >= static_cast<double>(min_count) ? n : 0.0;
        CHECK(counts.matrix.at(v.index(key.first), v.index(key.second)) == want);
        nonzero += want > 0;
      }
      CHECK(counts.matrix.edge_count() == nonzero);
    }
    // Total mass equals sum of C(|g|, 2) over groups.
    double mass = 0;
    for (const auto& g : c.groups) mass += g.items.size() * (g.items.size() - 1) / 2.0;
    CHECK(build_cooccurrence(c, false, 0).matrix.total_weight() == doctest::Approx(mass));

    // Per-owner normalization: brute-force per owner, divide, sum.
    std::map<std::string, GroupedCorpus> by_owner;
    for (const auto& g : c.groups) by_owner[g.owner].groups.push_back(g);
    const auto raw = count_pairs(c);
    std::map<std::pair<std::string, std::string>, double> want;
    for (const auto& [o, oc] : by_owner)
      for (const auto& [key, n] : count_pairs(oc))
        if (raw.at(key) >= 2) want[key] += n / static_cast<double>(oc.groups.size());
    const auto norm = build_cooccurrence(c, true, 2);
    for (const auto& [key, w] : want)
      CHECK(norm.matrix.at(norm.vocab.index(key.first), norm.vocab.index(key.second)) ==
            doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("filter_active_owners keeps owners above the threshold") {
  GroupedCorpus c;
  for (int k = 0; k < 3; ++k) c.groups.push_back({"busy", {"a", "b"}});
  c.groups.push_back({"idle", {"a", "b"}});
  const auto out = filter_active_owners(c, 2);
  CHECK(out.groups.size() == 3);
  for (const auto& g : out.groups) CHECK(g.owner == "busy");
}

TEST_CASE("synth_corpus determinism and community rate") {
  SynthParams p;
  p.groups = 10000;
  p.seed = 42;
  const auto a = synth_corpus(p);
  const auto b = synth_corpus(p);
  REQUIRE(a.corpus.groups.size() == b.corpus.groups.size());
  for (std::size_t g = 0; g < a.corpus.groups.size(); ++g) CHECK(a.corpus.groups[g].items == b.corpus.groups[g].items);
  CHECK(a.community.size() == p.communities * p.nodes_per_community);

  double same = 0, total = 0;
  for (std::size_t g = 0; g < a.corpus.groups.size(); ++g) {
    const auto& items = a.corpus.groups[g].items;
    CHECK(std::set<std::string>(items.begin(), items.end()).size() == items.size());
    CHECK(items.size() >= p.min_group_size);
    CHECK(items.size() <= p.max_group_size);
    for (const auto& it : items) {
      same += a.community.at(it) == a.group_home[g];
      total += 1;
    }
  }
  CHECK(same / total == doctest::Approx(0.9).epsilon(0.02 / 0.9));

  p.intra_prob = 1.0;
  const auto pure = synth_corpus(p);
  for (std::size_t g = 0; g < pure.corpus.groups.size(); ++g)
    for (const auto& it : pure.corpus.groups[g].items) CHECK(pure.community.at(it) == pure.group_home[g]);

  p.communities = 0;
  CHECK_THROWS_AS(synth_corpus(p), std::invalid_argument);
}
