// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/triple_set.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kgin/error.hpp"

namespace kgin {

namespace {

std::int64_t parse_id(const std::string& tok, const std::string& path, std::size_t line_no) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad integer token '" + tok + "'");
  if (v < 0)
    throw ParseError(path + ":" + std::to_string(line_no) + ": negative id '" + tok + "'");
  return v;
}

void sort_dedup(std::vector<std::array<std::int32_t, 3>>& t) {
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
}

}  // namespace

TripleSet load_kg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_kg: cannot open '" + path + "'");

  TripleSet kg;
  std::int64_t max_entity = -1, max_rel = -1;
  std::string line;
  std::size_t line_no = 0;
  std::size_t raw_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string a, b, c, extra;
    if (!(ss >> a)) continue;  // blank line
    if (!(ss >> b) || !(ss >> c) || (ss >> extra))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected exactly three tokens 'head relation tail'");
    const std::int64_t h = parse_id(a, path, line_no);
    const std::int64_t r = parse_id(b, path, line_no);
    const std::int64_t t = parse_id(c, path, line_no);
    max_entity = std::max({max_entity, h, t});
    max_rel = std::max(max_rel, r);
    kg.triples.push_back({std::int32_t(h), std::int32_t(r), std::int32_t(t)});
    ++raw_count;
  }

  const std::size_t before = kg.triples.size();
  sort_dedup(kg.triples);
  if (kg.triples.size() != before)
    kg.warnings.push_back(path + ": " + std::to_string(before - kg.triples.size()) +
                          " duplicate triple(s) collapsed");

  kg.num_entities = std::size_t(max_entity + 1);
  kg.num_canonical_relations = std::size_t(max_rel + 1);
  kg.num_relations = kg.num_canonical_relations;

  std::vector<bool> used(kg.num_canonical_relations, false);
  for (const auto& t : kg.triples) used[t[1]] = true;
  std::size_t unused = 0;
  for (bool u : used)
    if (!u) ++unused;
  if (unused > 0)
    kg.warnings.push_back(path + ": " + std::to_string(unused) +
                          " relation id(s) below the max are unused (gap in relation ids)");
  return kg;
}

void save_kg(const TripleSet& kg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_kg: cannot open '" + path + "' for writing");
  for (const auto& t : kg.triples) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw Error("save_kg: write failed for '" + path + "'");
}

TripleSet add_inverse_relations(const TripleSet& kg) {
  if (kg.inverses_applied)
    throw ContractError("add_inverse_relations: inverses already applied (relation space doubled)");
  TripleSet out = kg;
  out.inverses_applied = true;
  out.num_relations = 2 * kg.num_canonical_relations;
  const std::int32_t shift = std::int32_t(kg.num_canonical_relations);
  out.triples.reserve(2 * kg.triples.size());
  for (const auto& t : kg.triples) out.triples.push_back({t[2], std::int32_t(t[1] + shift), t[0]});
  std::sort(out.triples.begin(), out.triples.end());
  out.triples.erase(std::unique(out.triples.begin(), out.triples.end()), out.triples.end());
  return out;
}

}  // namespace kgin
