#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nprox/graph.hpp"
#include "nprox/io.hpp"
#include "test_support.hpp"

using namespace nprox;

namespace {

Vocabulary vocab_of(std::size_t n) {
  std::vector<std::string> items;
  for (std::size_t i = 0; i < n; ++i) items.push_back("item" + std::to_string(i));
  return Vocabulary(items);
}

}  // namespace

TEST_CASE("triplets round trip bit for bit") {
  test::TempDir dir("io");
  std::mt19937_64 rng(1);
  const auto m = test::random_graph(25, 0.3, rng, 7.0).scaled(1.0 / 3.0);
  io::write_triplets(dir.path / "m.tsv", m);
  CHECK(io::read_triplets(dir.path / "m.tsv") == m);

  std::ofstream(dir.path / "bad.tsv") << "# dim 3\n0\t1\n";
  CHECK_THROWS_WITH(io::read_triplets(dir.path / "bad.tsv"), doctest::Contains(":2"));
  CHECK_THROWS(io::read_triplets(dir.path / "missing.tsv"));
}

TEST_CASE("vocabulary and labels") {
  test::TempDir dir("io");
  const auto v = vocab_of(5);
  io::write_vocab(dir.path / "v.tsv", v);
  CHECK(io::read_vocab(dir.path / "v.tsv").items() == v.items());

  std::ofstream(dir.path / "l.tsv") << "item0\tz\nitem2\ta\nother\tq\nitem4\tz\n";
  std::vector<std::string> names;
  const auto labels = io::read_labels(dir.path / "l.tsv", v, &names);
  CHECK(names == std::vector<std::string>{"a", "z"});
  CHECK(labels == std::vector<std::int32_t>{1, kUnlabeled, 0, kUnlabeled, 1});

  std::ofstream(dir.path / "gap.tsv") << "0\ta\n2\tb\n";
  CHECK_THROWS_WITH(io::read_vocab(dir.path / "gap.tsv"), doctest::Contains("consecutive"));
}

TEST_CASE("event logs and playlists round trip") {
  test::TempDir dir("io");
  EventLog log{{"u1", 10.5, "a", 30.0}, {"u1", 100, "b", {}}, {"u2", 0, "c", 12.25}};
  io::write_event_log(dir.path / "log.tsv", log);
  const auto back = io::read_event_log(dir.path / "log.tsv");
  REQUIRE(back.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back[k].owner == log[k].owner);
    CHECK(back[k].timestamp == log[k].timestamp);
    CHECK(back[k].item == log[k].item);
    CHECK(back[k].duration == log[k].duration);
  }

  GroupedCorpus pl;
  pl.kind = CorpusKind::playlist;
  pl.groups = {{"line0", {"a", "b", "c"}}, {"line1", {"d"}}};
  io::write_playlists(dir.path / "pl.txt", pl);
  const auto pb = io::read_playlists(dir.path / "pl.txt");
  REQUIRE(pb.groups.size() == 2);
  CHECK(pb.groups[0].items == pl.groups[0].items);
  CHECK(pb.groups[1].owner == "line2");

  std::ofstream(dir.path / "bad.tsv") << "u1\tnot-a-time\ta\n";
  CHECK_THROWS(io::read_event_log(dir.path / "bad.tsv"));
}

TEST_CASE("stack directory round trip") {
  test::TempDir dir("io");
  std::mt19937_64 rng(2);
  const auto s = test::random_graph(40, 0.1, rng);
  const auto stack = build_stack(s);
  io::write_stack(dir.path / "stack", stack);
  const auto back = io::read_stack(dir.path / "stack");
  CHECK(back.s == stack.s);
  CHECK(back.p == stack.p);
  CHECK(back.h == stack.h);
  for (Network n : kNetworks)
    stack.network(n).for_each_edge(
        [&](NodeId i, NodeId j, double) { CHECK(back.class_of(n, i, j) == stack.class_of(n, i, j)); });
}

TEST_CASE("attraction csv round trip") {
  test::TempDir dir("io");
  const auto v = vocab_of(3);
  std::vector<AttractionRecord> recs(3);
  recs[0].target = 2;
  recs[0].size = 17;
  recs[0].fit = {1.0 / 3.0, -0.7, 0.01, true, 12};
  recs[0].delta = 5.5;
  recs[0].delta_dot = -0.1;
  recs[0].valid = true;
  recs[1].target = 0;
  recs[1].network = Network::H;
  recs[1].weight_class = 4;
  recs[1].size = 3;
  recs[2].target = 1;
  recs[2].network = Network::S;
  recs[2].weight_class = 1;
  recs[2].fit = {2, 1, 0, true, 3};
  recs[2].delta = 6.25;
  recs[2].delta_dot = 0.3;
  recs[2].valid = true;
  io::write_attraction_csv(dir.path / "a.csv", recs, v);
  const auto back = io::read_attraction_csv(dir.path / "a.csv", v);
  REQUIRE(back.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back[k].target == recs[k].target);
    CHECK(back[k].network == recs[k].network);
    CHECK(back[k].weight_class == recs[k].weight_class);
    CHECK(back[k].size == recs[k].size);
    CHECK(back[k].valid == recs[k].valid);
    if (recs[k].valid) {
      CHECK(back[k].fit.g == recs[k].fit.g);
      CHECK(back[k].fit.s == recs[k].fit.s);
      CHECK(back[k].delta == recs[k].delta);
      CHECK(back[k].delta_dot == recs[k].delta_dot);
    }
  }
  const auto text = io::read_file(dir.path / "a.csv");
  CHECK(text.rfind("target,network,class,size,g,s,residual,delta,delta_dot,valid\n", 0) == 0);
  CHECK(text.find("item2,W0,0,17,") != std::string::npos);
}

TEST_CASE("atomic writes and double formatting") {
  test::TempDir dir("io");
  io::write_atomic(dir.path / "f.txt", "one");
  io::write_atomic(dir.path / "f.txt", "two");
  CHECK(io::read_file(dir.path / "f.txt") == "two");
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5})
    CHECK(std::stod(io::format_double(v)) == v);
}
