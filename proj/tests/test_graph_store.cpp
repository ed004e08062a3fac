// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
//
// Loaders, degree filtering, and the message-passing index.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "kgin/error.hpp"
#include "kgin/graph_index.hpp"
#include "kgin/interaction_set.hpp"
#include "kgin/triple_set.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace kgin;

TEST_CASE("load_cf parses, sorts, and dedups") {
  const auto path = testsup::write_file(testsup::tmp_dir("graph") / "cf.txt",
                                        "0 3 1 2 2\n2 0\n\n1 4\n");
  const InteractionSet cf = load_cf(path);
  CHECK(cf.num_users == 3);
  CHECK(cf.num_items == 5);
  CHECK(cf.positives[0] == std::vector<std::int32_t>{1, 2, 3});
  CHECK(cf.positives[1] == std::vector<std::int32_t>{4});
  CHECK(cf.positives[2] == std::vector<std::int32_t>{0});
  CHECK(cf.warnings.empty());
  CHECK(cf.total_interactions() == 5);
  CHECK(cf.has(0, 2));
  CHECK_FALSE(cf.has(0, 4));
  CHECK_FALSE(cf.has(-1, 0));
  CHECK_FALSE(cf.has(7, 0));
}

TEST_CASE("load_cf flags duplicate and empty user lines") {
  const auto path = testsup::write_file(testsup::tmp_dir("graph") / "cf_dup.txt",
                                        "0 1 2\n1\n0 2 3\n");
  const InteractionSet cf = load_cf(path);
  CHECK(cf.positives[0] == std::vector<std::int32_t>{1, 2, 3});  // merged
  CHECK(cf.positives[1].empty());
  REQUIRE(cf.warnings.size() == 2);
  CHECK(cf.warnings[0].find("no items") != std::string::npos);
  CHECK(cf.warnings[1].find("duplicate user line") != std::string::npos);
}

TEST_CASE("load_cf rejects malformed input with the line number") {
  const auto dir = testsup::tmp_dir("graph");
  CHECK_THROWS_AS(load_cf((dir / "missing.txt").string()), ParseError);

  const auto bad = testsup::write_file(dir / "cf_bad.txt", "0 1\n1 2x\n");
  CHECK_THROWS_WITH_AS(load_cf(bad), doctest::Contains(":2:"), ParseError);

  const auto neg = testsup::write_file(dir / "cf_neg.txt", "0 -3\n");
  CHECK_THROWS_AS(load_cf(neg), ParseError);
}

TEST_CASE("load_cf honors minimum id-space floors") {
  const auto path = testsup::write_file(testsup::tmp_dir("graph") / "cf_min.txt", "0 1\n");
  const InteractionSet cf = load_cf(path, 10, 20);
  CHECK(cf.num_users == 10);
  CHECK(cf.num_items == 20);
  CHECK(cf.positives.size() == 10);
}

TEST_CASE("save_cf / load_cf round-trips") {
  InteractionSet cf;
  cf.num_users = 4;
  cf.num_items = 6;
  cf.positives = {{0, 5}, {}, {2, 3, 4}, {1}};
  const auto path = (testsup::tmp_dir("graph") / "cf_rt.txt").string();
  save_cf(cf, path);
  const InteractionSet back = load_cf(path, cf.num_users, cf.num_items);
  REQUIRE(back.num_users == cf.num_users);
  CHECK(back.num_items == cf.num_items);
  for (std::size_t u = 0; u < cf.num_users; ++u) CHECK(back.positives[u] == cf.positives[u]);
}

TEST_CASE("expand grows and never shrinks") {
  InteractionSet cf;
  cf.num_users = 2;
  cf.num_items = 3;
  cf.positives = {{0}, {1}};
  cf.expand(4, 2);
  CHECK(cf.num_users == 4);
  CHECK(cf.num_items == 3);
  CHECK(cf.positives.size() == 4);
  CHECK(cf.positives[3].empty());
}

TEST_CASE("load_kg dedups triples and flags unused relation ids") {
  const auto path = testsup::write_file(testsup::tmp_dir("graph") / "kg.txt",
                                        "0 2 3\n1 0 3\n0 2 3\n");
  const TripleSet kg = load_kg(path);
  CHECK(kg.num_entities == 4);
  CHECK(kg.num_relations == 3);
  CHECK(kg.num_canonical_relations == 3);
  CHECK_FALSE(kg.inverses_applied);
  REQUIRE(kg.triples.size() == 2);  // duplicate collapsed
  CHECK(kg.triples[0] == std::array<std::int32_t, 3>{0, 2, 3});
  CHECK(kg.triples[1] == std::array<std::int32_t, 3>{1, 0, 3});
  REQUIRE(kg.warnings.size() >= 1);  // relation id 1 never used
  bool flagged = false;
  for (const auto& w : kg.warnings) flagged = flagged || w.find("relation") != std::string::npos;
  CHECK(flagged);
}

TEST_CASE("load_kg rejects malformed lines") {
  const auto dir = testsup::tmp_dir("graph");
  const auto two = testsup::write_file(dir / "kg_two.txt", "0 1\n");
  CHECK_THROWS_AS(load_kg(two), ParseError);
  const auto four = testsup::write_file(dir / "kg_four.txt", "0 1 2 3\n");
  CHECK_THROWS_AS(load_kg(four), ParseError);
  const auto junk = testsup::write_file(dir / "kg_junk.txt", "0 a 2\n");
  CHECK_THROWS_WITH_AS(load_kg(junk), doctest::Contains(":1:"), ParseError);
}

TEST_CASE("save_kg / load_kg round-trips") {
  TripleSet kg;
  kg.num_entities = 5;
  kg.num_relations = 2;
  kg.num_canonical_relations = 2;
  kg.triples = {{0, 0, 4}, {1, 1, 2}, {3, 0, 0}};
  const auto path = (testsup::tmp_dir("graph") / "kg_rt.txt").string();
  save_kg(kg, path);
  const TripleSet back = load_kg(path);
  CHECK(back.num_entities == kg.num_entities);
  CHECK(back.num_relations == kg.num_relations);
  CHECK(back.triples == kg.triples);
}

TEST_CASE("add_inverse_relations doubles edges and relation ids") {
  TripleSet kg;
  kg.num_entities = 4;
  kg.num_relations = 2;
  kg.num_canonical_relations = 2;
  kg.triples = {{0, 1, 3}, {2, 0, 1}};
  const TripleSet doubled = add_inverse_relations(kg);
  CHECK(doubled.num_relations == 4);
  CHECK(doubled.num_canonical_relations == 2);
  CHECK(doubled.inverses_applied);
  REQUIRE(doubled.triples.size() == 4);
  // (t, r + 2, h) present for every (h, r, t).
  auto has = [&](std::int32_t h, std::int32_t r, std::int32_t t) {
    return std::find(doubled.triples.begin(), doubled.triples.end(),
                     std::array<std::int32_t, 3>{h, r, t}) != doubled.triples.end();
  };
  CHECK(has(0, 1, 3));
  CHECK(has(3, 3, 0));
  CHECK(has(2, 0, 1));
  CHECK(has(1, 2, 2));
  CHECK_THROWS_AS(add_inverse_relations(doubled), ContractError);
}

TEST_CASE("core_filter drops thin users and items iteratively") {
  InteractionSet cf;
  cf.num_users = 3;
  cf.num_items = 3;
  cf.positives = {{0, 1}, {0, 1}, {2}};
  const CoreFilterResult r = core_filter(cf, 2);
  CHECK(r.cf.num_users == 2);
  CHECK(r.cf.num_items == 2);
  CHECK(r.user_map == std::vector<std::int32_t>{0, 1, -1});
  CHECK(r.item_map == std::vector<std::int32_t>{0, 1, -1});
  CHECK(r.cf.positives[0] == std::vector<std::int32_t>{0, 1});
  CHECK(r.cf.positives[1] == std::vector<std::int32_t>{0, 1});
  CHECK(r.rounds >= 2);  // item 2 falls first, then user 2

  // Cascade to empty: every drop starves the next round.
  InteractionSet chain;
  chain.num_users = 2;
  chain.num_items = 2;
  chain.positives = {{0, 1}, {1}};
  const CoreFilterResult all_gone = core_filter(chain, 2);
  CHECK(all_gone.cf.num_users == 0);
  CHECK(all_gone.cf.num_items == 0);
  CHECK(all_gone.cf.total_interactions() == 0);

  // min_degree 1 keeps everything with at least one edge.
  const CoreFilterResult keep = core_filter(cf, 1);
  CHECK(keep.cf.num_users == 3);
  CHECK(keep.cf.num_items == 3);
  CHECK(keep.cf.total_interactions() == cf.total_interactions());
}

TEST_CASE("build_index lays out sorted adjacency in both spaces") {
  const testsup::TinyGraph t = testsup::tiny_graph();
  const GraphIndex& g = t.g;
  CHECK(g.num_users == 3);
  CHECK(g.num_items == 4);
  CHECK(g.num_entities == 6);
  CHECK(g.num_relations == 4);  // 2 canonical + inverses

  REQUIRE(g.user_adj.n() == 3);
  CHECK(g.user_adj.deg(0) == 2);
  CHECK(g.user_adj.deg(1) == 3);
  CHECK(g.user_adj.deg(2) == 1);
  CHECK(g.user_adj.nbr[g.user_adj.offsets[2]] == 0);  // u2 -> i0

  REQUIRE(g.entity_adj.n() == 6);
  // entity 4 receives inverses of (0,0,4), (1,0,4), (3,1,4).
  CHECK(g.entity_adj.deg(4) == 3);
  // neighbors sorted by (tail, relation)
  for (std::size_t e = 0; e < g.entity_adj.n(); ++e) {
    for (std::int64_t j = g.entity_adj.offsets[e] + 1; j < g.entity_adj.offsets[e + 1]; ++j) {
      const bool ordered =
          g.entity_adj.nbr[j - 1] < g.entity_adj.nbr[j] ||
          (g.entity_adj.nbr[j - 1] == g.entity_adj.nbr[j] &&
           g.entity_adj.rel[j - 1] <= g.entity_adj.rel[j]);
      CHECK(ordered);
    }
  }
  CHECK(g.zero_degree_users() == 0);
  CHECK(g.zero_degree_entities() == 0);
}

TEST_CASE("build_index grows the entity space and rejects bad references") {
  // Items occupy the entity prefix, so the entity count expands to cover them.
  InteractionSet cf;
  cf.num_users = 1;
  cf.num_items = 9;
  cf.positives = {{8}};
  TripleSet canonical;
  canonical.num_entities = 4;
  canonical.num_relations = 1;
  canonical.num_canonical_relations = 1;
  canonical.triples = {{0, 0, 1}};
  const TripleSet doubled = add_inverse_relations(canonical);
  const GraphIndex g = build_index(cf, doubled);
  CHECK(g.num_entities == 9);
  CHECK(g.num_items == 9);

  // A triple referencing an entity beyond the declared space is data error.
  TripleSet bad = doubled;
  bad.triples.push_back({0, 0, 40});
  CHECK_THROWS_AS(build_index(cf, bad), DataError);

  // Non-doubled triples are a contract violation.
  InteractionSet ok;
  ok.num_users = 1;
  ok.num_items = 2;
  ok.positives = {{0}};
  CHECK_THROWS_AS(build_index(ok, canonical), ContractError);
}

TEST_CASE("index round-trips through the binary snapshot") {
  const testsup::TinyGraph t = testsup::tiny_graph();
  const auto path = (testsup::tmp_dir("graph") / "g.idx").string();
  save_index(t.g, path);
  const GraphIndex back = load_index(path);
  CHECK(back.num_users == t.g.num_users);
  CHECK(back.num_items == t.g.num_items);
  CHECK(back.num_entities == t.g.num_entities);
  CHECK(back.num_relations == t.g.num_relations);
  CHECK(back.user_adj.offsets == t.g.user_adj.offsets);
  CHECK(back.user_adj.nbr == t.g.user_adj.nbr);
  CHECK(back.entity_adj.offsets == t.g.entity_adj.offsets);
  CHECK(back.entity_adj.nbr == t.g.entity_adj.nbr);
  CHECK(back.entity_adj.rel == t.g.entity_adj.rel);
  CHECK_THROWS_AS(load_index((testsup::tmp_dir("graph") / "nope.idx").string()), Error);
}

TEST_CASE("triple file order does not affect the index") {
  const auto dir = testsup::tmp_dir("graph");
  const auto a = testsup::write_file(dir / "kg_a.txt", "0 0 2\n1 0 2\n0 1 1\n");
  const auto b = testsup::write_file(dir / "kg_b.txt", "0 1 1\n1 0 2\n0 0 2\n");
  InteractionSet cf;
  cf.num_users = 1;
  cf.num_items = 2;
  cf.positives = {{0, 1}};
  const GraphIndex ga = build_index(cf, add_inverse_relations(load_kg(a)));
  const GraphIndex gb = build_index(cf, add_inverse_relations(load_kg(b)));
  CHECK(ga.entity_adj.offsets == gb.entity_adj.offsets);
  CHECK(ga.entity_adj.nbr == gb.entity_adj.nbr);
  CHECK(ga.entity_adj.rel == gb.entity_adj.rel);
}
