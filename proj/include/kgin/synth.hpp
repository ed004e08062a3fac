// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kgin/config.hpp"
#include "kgin/interaction_set.hpp"
#include "kgin/params.hpp"
#include "kgin/triple_set.hpp"

namespace kgin {

// What the generator planted, for recovery checks.
struct GroundTruth {
  std::vector<std::int32_t> user_intent;           // per user: primary theme
  std::vector<std::int32_t> user_secondary;        // per user: secondary theme
  std::vector<std::int32_t> item_theme;            // per item
  std::vector<std::vector<double>> mixtures;       // normalized, per theme
};

struct SynthData {
  InteractionSet train;
  InteractionSet test;
  TripleSet kg;  // canonical relations; inverses not yet applied
  GroundTruth truth;
};

// Generates a dataset with planted structure: item i carries theme i mod P;
// its attribute triples use relations drawn from the theme's mixture; user u
// carries intent u mod P and picks mostly theme-matching items (off-theme
// picks weighted by `noise`). Throws DataError when the spec is infeasible.
SynthData generate(const SynthSpec& spec);

// Independent distance-correlation oracle, written as the plain nested-loop
// definition with no shared code with the measurement path.
double dcor_oracle(const std::vector<double>& x, const std::vector<double>& y);

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_location;  // "table[row,col]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Central-difference gradient check. `grad_fn` must populate the grads of
// `tables` for the same loss `loss_fn` evaluates; values are perturbed one
// entry at a time and restored exactly. Frozen tables are skipped. The
// relative error uses a floor of 1e-4 * max(1, max |analytic|) so exact-zero
// gradients compare cleanly.
FdReport fd_gradient_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& grad_fn,
                           const std::vector<ParamTable*>& tables,
                           double step = 1e-5);

}  // namespace kgin
