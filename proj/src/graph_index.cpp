// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/graph_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "kgin/error.hpp"

namespace kgin {

namespace {

constexpr char kMagic[8] = {'K', 'G', 'I', 'N', 'G', 'I', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ofstream& out, const std::vector<T>& v) {
  const std::uint64_t n = v.size();
  put(out, n);
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(n * sizeof(T)));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("load_index: truncated file");
  return v;
}

template <class T>
std::vector<T> get_vec(std::ifstream& in) {
  const std::uint64_t n = get<std::uint64_t>(in);
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
  if (!in) throw ParseError("load_index: truncated file");
  return v;
}

}  // namespace

std::size_t GraphIndex::zero_degree_users() const {
  std::size_t n = 0;
  for (std::size_t u = 0; u < num_users; ++u)
    if (user_adj.deg(u) == 0) ++n;
  return n;
}

std::size_t GraphIndex::zero_degree_entities() const {
  std::size_t n = 0;
  for (std::size_t v = 0; v < num_entities; ++v)
    if (entity_adj.deg(v) == 0) ++n;
  return n;
}

GraphIndex build_index(const InteractionSet& cf, const TripleSet& kg) {
  if (!kg.inverses_applied)
    throw ContractError("build_index: triple set must be inverse-doubled first");

  GraphIndex g;
  g.num_users = cf.num_users;
  g.num_items = cf.num_items;
  g.num_entities = std::max(kg.num_entities, cf.num_items);
  g.num_relations = kg.num_relations;

  if (cf.num_items > g.num_entities)
    throw DataError("build_index: item id space exceeds entity id space");
  for (std::size_t u = 0; u < cf.num_users; ++u)
    for (std::int32_t i : cf.positives[u])
      if (std::size_t(i) >= g.num_entities)
        throw DataError("build_index: item " + std::to_string(i) + " outside entity space");

  // User-side CSR: positives are already sorted and unique.
  g.user_adj.offsets.assign(g.num_users + 1, 0);
  for (std::size_t u = 0; u < g.num_users; ++u)
    g.user_adj.offsets[u + 1] = g.user_adj.offsets[u] + std::int64_t(cf.positives[u].size());
  g.user_adj.nbr.reserve(std::size_t(g.user_adj.offsets.back()));
  for (std::size_t u = 0; u < g.num_users; ++u)
    g.user_adj.nbr.insert(g.user_adj.nbr.end(), cf.positives[u].begin(), cf.positives[u].end());

  // Entity-side CSR keyed by head, edges sorted by (tail, relation).
  std::vector<std::array<std::int32_t, 3>> edges;  // (head, tail, rel)
  edges.reserve(kg.triples.size());
  for (const auto& t : kg.triples) {
    if (std::size_t(t[0]) >= g.num_entities || std::size_t(t[2]) >= g.num_entities)
      throw DataError("build_index: triple references entity outside entity space");
    if (std::size_t(t[1]) >= g.num_relations)
      throw DataError("build_index: triple references relation outside relation space");
    edges.push_back({t[0], t[2], t[1]});
  }
  std::sort(edges.begin(), edges.end());

  g.entity_adj.offsets.assign(g.num_entities + 1, 0);
  for (const auto& e : edges) ++g.entity_adj.offsets[e[0] + 1];
  for (std::size_t v = 0; v < g.num_entities; ++v)
    g.entity_adj.offsets[v + 1] += g.entity_adj.offsets[v];
  g.entity_adj.nbr.reserve(edges.size());
  g.entity_adj.rel.reserve(edges.size());
  for (const auto& e : edges) {
    g.entity_adj.nbr.push_back(e[1]);
    g.entity_adj.rel.push_back(e[2]);
  }
  return g;
}

void save_index(const GraphIndex& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_index: cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, std::uint64_t(g.num_users));
  put(out, std::uint64_t(g.num_items));
  put(out, std::uint64_t(g.num_entities));
  put(out, std::uint64_t(g.num_relations));
  put_vec(out, g.user_adj.offsets);
  put_vec(out, g.user_adj.nbr);
  put_vec(out, g.entity_adj.offsets);
  put_vec(out, g.entity_adj.rel);
  put_vec(out, g.entity_adj.nbr);
  if (!out) throw Error("save_index: write failed for '" + path + "'");
}

GraphIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_index: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("load_index: bad magic bytes in '" + path + "'");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw ParseError("load_index: unsupported version " + std::to_string(version));
  GraphIndex g;
  g.num_users = std::size_t(get<std::uint64_t>(in));
  g.num_items = std::size_t(get<std::uint64_t>(in));
  g.num_entities = std::size_t(get<std::uint64_t>(in));
  g.num_relations = std::size_t(get<std::uint64_t>(in));
  g.user_adj.offsets = get_vec<std::int64_t>(in);
  g.user_adj.nbr = get_vec<std::int32_t>(in);
  g.entity_adj.offsets = get_vec<std::int64_t>(in);
  g.entity_adj.rel = get_vec<std::int32_t>(in);
  g.entity_adj.nbr = get_vec<std::int32_t>(in);
  return g;
}

}  // namespace kgin
