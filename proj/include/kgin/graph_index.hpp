// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "kgin/adjacency.hpp"
#include "kgin/interaction_set.hpp"
#include "kgin/triple_set.hpp"

namespace kgin {

// Immutable message-passing index. Users and entities live in separate id
// spaces; items occupy the prefix [0, num_items) of the entity space.
struct GraphIndex {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // inverse-doubled

  Csr user_adj;      // user -> sorted item ids
  RelCsr entity_adj; // head entity -> (tail, relation) sorted by (tail, relation)

  std::size_t zero_degree_users() const;
  std::size_t zero_degree_entities() const;
};

// Requires inverse-doubled triples; rejects item ids outside the entity space.
GraphIndex build_index(const InteractionSet& cf, const TripleSet& kg);

// Versioned little-endian binary snapshot; round-trips bit-for-bit.
void save_index(const GraphIndex& g, const std::string& path);
GraphIndex load_index(const std::string& path);

}  // namespace kgin
