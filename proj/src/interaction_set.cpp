// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/interaction_set.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kgin/error.hpp"

namespace kgin {

namespace {

// Strict integer token parse; anything else is a format violation.
std::int64_t parse_id(const std::string& tok, const std::string& path, std::size_t line_no) {
  std::int64_t v = 0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad integer token '" + tok + "'");
  if (v < 0)
    throw ParseError(path + ":" + std::to_string(line_no) + ": negative id '" + tok + "'");
  return v;
}

}  // namespace

bool InteractionSet::has(std::int32_t user, std::int32_t item) const {
  if (user < 0 || std::size_t(user) >= num_users) return false;
  const auto& p = positives[user];
  return std::binary_search(p.begin(), p.end(), item);
}

void InteractionSet::expand(std::size_t users, std::size_t items) {
  if (users > num_users) num_users = users;
  if (items > num_items) num_items = items;
  positives.resize(num_users);
}

InteractionSet load_cf(const std::string& path, std::size_t min_users, std::size_t min_items) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_cf: cannot open '" + path + "'");

  InteractionSet cf;
  std::int64_t max_user = -1, max_item = -1;
  std::vector<std::pair<std::int64_t, std::vector<std::int32_t>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    const std::int64_t user = parse_id(tok, path, line_no);
    std::vector<std::int32_t> items;
    while (ss >> tok) {
      const std::int64_t item = parse_id(tok, path, line_no);
      max_item = std::max(max_item, item);
      items.push_back(std::int32_t(item));
    }
    if (items.empty())
      cf.warnings.push_back(path + ":" + std::to_string(line_no) + ": user " +
                            std::to_string(user) + " has no items");
    max_user = std::max(max_user, user);
    rows.emplace_back(user, std::move(items));
  }

  cf.num_users = std::max<std::size_t>(min_users, std::size_t(max_user + 1));
  cf.num_items = std::max<std::size_t>(min_items, std::size_t(max_item + 1));
  cf.positives.assign(cf.num_users, {});

  std::vector<bool> seen(cf.num_users, false);
  for (auto& [user, items] : rows) {
    auto& dst = cf.positives[user];
    if (seen[user])
      cf.warnings.push_back(path + ": duplicate user line for user " + std::to_string(user) +
                            " merged");
    seen[user] = true;
    dst.insert(dst.end(), items.begin(), items.end());
  }
  for (auto& p : cf.positives) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  return cf;
}

void save_cf(const InteractionSet& cf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_cf: cannot open '" + path + "' for writing");
  for (std::size_t u = 0; u < cf.num_users; ++u) {
    if (cf.positives[u].empty()) continue;
    out << u;
    for (std::int32_t i : cf.positives[u]) out << ' ' << i;
    out << '\n';
  }
  if (!out) throw Error("save_cf: write failed for '" + path + "'");
}

CoreFilterResult core_filter(const InteractionSet& cf, std::size_t min_degree) {
  std::vector<bool> keep_user(cf.num_users, true), keep_item(cf.num_items, true);
  std::vector<std::size_t> udeg(cf.num_users, 0), ideg(cf.num_items, 0);

  CoreFilterResult res;
  bool changed = true;
  while (changed) {
    changed = false;
    ++res.rounds;
    std::fill(udeg.begin(), udeg.end(), 0);
    std::fill(ideg.begin(), ideg.end(), 0);
    for (std::size_t u = 0; u < cf.num_users; ++u) {
      if (!keep_user[u]) continue;
      for (std::int32_t i : cf.positives[u]) {
        if (!keep_item[i]) continue;
        ++udeg[u];
        ++ideg[i];
      }
    }
    for (std::size_t u = 0; u < cf.num_users; ++u)
      if (keep_user[u] && udeg[u] < min_degree) {
        keep_user[u] = false;
        changed = true;
      }
    for (std::size_t i = 0; i < cf.num_items; ++i)
      if (keep_item[i] && ideg[i] < min_degree) {
        keep_item[i] = false;
        changed = true;
      }
  }

  res.user_map.assign(cf.num_users, -1);
  res.item_map.assign(cf.num_items, -1);
  std::int32_t nu = 0, ni = 0;
  for (std::size_t u = 0; u < cf.num_users; ++u)
    if (keep_user[u]) res.user_map[u] = nu++;
  for (std::size_t i = 0; i < cf.num_items; ++i)
    if (keep_item[i]) res.item_map[i] = ni++;

  res.cf.num_users = std::size_t(nu);
  res.cf.num_items = std::size_t(ni);
  res.cf.positives.assign(res.cf.num_users, {});
  for (std::size_t u = 0; u < cf.num_users; ++u) {
    if (!keep_user[u]) continue;
    auto& dst = res.cf.positives[res.user_map[u]];
    for (std::int32_t i : cf.positives[u])
      if (keep_item[i]) dst.push_back(res.item_map[i]);
    std::sort(dst.begin(), dst.end());
  }
  return res;
}

}  // namespace kgin
