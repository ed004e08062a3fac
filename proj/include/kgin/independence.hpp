// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "kgin/mat.hpp"
#include "kgin/tape.hpp"

namespace kgin {

struct DcorResult {
  double value = 0.0;
  bool degenerate = false;  // a side had zero distance variance
};

// Distance correlation between two length-d vectors, treating the d
// coordinates as scalar samples. Always in [0, 1]; 1 for any non-constant x
// against c*x + b with c != 0; 0 with the degenerate flag when either side is
// constant. Requires d >= 2.
DcorResult dcor(const double* x, const double* y, std::size_t d);
DcorResult dcor_rows(const Mat& m, std::size_t p, std::size_t q);

struct PairwiseLoss {
  double value = 0.0;
  std::size_t degenerate_pairs = 0;
};

// Sum of dcor over unordered intent pairs (rows of `intents`).
PairwiseLoss dcor_loss(const Mat& intents);

// Contrastive self-similarity loss over cosine similarities at temperature
// tau: sum_p [logsumexp_q(s_pq / tau) - s_pp / tau]. Exactly 0 for a single
// intent. Zero-norm intents are a degenerate-input error naming the intent.
double mi_loss(const Mat& intents, double tau);

// Mean dcor over unordered intent pairs; 0 when fewer than two intents.
// Degenerate pairs contribute 0 and still count in the denominator.
double mean_pairwise_dcor(const Mat& intents);

// Differentiable versions of the two regularizers, built from tape primitives
// with the same arithmetic as the pure functions above.
ad::VarId build_mi_loss(ad::Tape& t, ad::VarId intent_embs, double tau);
ad::VarId build_dcor_loss(ad::Tape& t, ad::VarId intent_embs);

}  // namespace kgin
