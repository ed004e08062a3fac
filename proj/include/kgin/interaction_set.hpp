// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace kgin {

// User -> item interactions. One sorted, deduplicated positive list per user.
// Item ids index the prefix of the entity id space.
struct InteractionSet {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::vector<std::int32_t>> positives;  // size num_users
  std::vector<std::string> warnings;                 // loader notes, not data

  std::size_t total_interactions() const {
    std::size_t n = 0;
    for (const auto& p : positives) n += p.size();
    return n;
  }

  bool has(std::int32_t user, std::int32_t item) const;

  // Grow the id spaces (never shrinks); used to unify train/test dimensions.
  void expand(std::size_t users, std::size_t items);
};

// Text format: one line per user, "user item item item ...", whitespace
// separated. A repeated user line merges (flagged in warnings); a bare user id
// line keeps the user with an empty list (flagged). Malformed tokens raise
// ParseError with the offending line number.
InteractionSet load_cf(const std::string& path, std::size_t min_users = 0,
                       std::size_t min_items = 0);

void save_cf(const InteractionSet& cf, const std::string& path);

struct CoreFilterResult {
  InteractionSet cf;
  // old id -> new id, -1 when dropped.
  std::vector<std::int32_t> user_map;
  std::vector<std::int32_t> item_map;
  std::size_t rounds = 0;
};

// Iterative degree filter: repeatedly drop users and items with fewer than
// min_degree interactions until stable, then compact ids.
CoreFilterResult core_filter(const InteractionSet& cf, std::size_t min_degree = 10);

}  // namespace kgin
