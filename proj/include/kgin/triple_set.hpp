// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace kgin {

// Knowledge-graph triples (head, relation, tail), deduplicated.
struct TripleSet {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;            // current relation id space
  std::size_t num_canonical_relations = 0;  // before inverse doubling
  bool inverses_applied = false;
  std::vector<std::array<std::int32_t, 3>> triples;  // sorted (h, r, t)
  std::vector<std::string> warnings;
};

// Text format: one "head relation tail" triple per line, whitespace separated,
// exactly three integer tokens. Duplicates collapse; unused relation ids below
// the max are flagged in warnings.
TripleSet load_kg(const std::string& path);

void save_kg(const TripleSet& kg, const std::string& path);

// For every (h, r, t) adds (t, r + num_canonical_relations, h) and doubles the
// relation id space, so every edge can be traversed in both directions with a
// direction-specific relation embedding. Applying it twice is a contract error.
TripleSet add_inverse_relations(const TripleSet& kg);

}  // namespace kgin
