// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kgin {

// Plain CSR adjacency: node -> sorted neighbor ids.
struct Csr {
  std::vector<std::int64_t> offsets;  // size n+1
  std::vector<std::int32_t> nbr;

  std::size_t n() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::int64_t deg(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
};

// CSR adjacency with a relation id per edge: node -> sorted (neighbor, relation).
struct RelCsr {
  std::vector<std::int64_t> offsets;  // size n+1
  std::vector<std::int32_t> rel;
  std::vector<std::int32_t> nbr;

  std::size_t n() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::int64_t deg(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
};

}  // namespace kgin
