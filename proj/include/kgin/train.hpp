// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "kgin/aggregate.hpp"
#include "kgin/config.hpp"
#include "kgin/graph_index.hpp"
#include "kgin/interaction_set.hpp"

namespace kgin {

// One pairwise-ranking batch; the three vectors are parallel.
struct Batch {
  std::vector<std::int32_t> users;
  std::vector<std::int32_t> pos;
  std::vector<std::int32_t> neg;
};

// Dot-product score of user u against item i under final representations.
double score(std::int32_t u, std::int32_t i, const FinalReps& reps);

// Batch-summed pairwise ranking loss: sum over samples of
// softplus(score(u, neg) - score(u, pos)).
double bpr_loss(const Batch& batch, const FinalReps& reps);

struct LossBreakdown {
  double total = 0.0;
  double bpr = 0.0;
  double independence = 0.0;
  double l2 = 0.0;
};

// Loss sub-graph handles on a tape; absent terms are kInvalidVar.
struct LossVars {
  ad::VarId total = ad::kInvalidVar;
  ad::VarId bpr = ad::kInvalidVar;
  ad::VarId independence = ad::kInvalidVar;
  ad::VarId l2 = ad::kInvalidVar;
};

// Builds total = bpr + lambda1 * independence + lambda2 * l2 on the tape that
// produced `fv`. A term whose lambda is zero is not built at all, so runs that
// differ only in a zeroed lambda share an identical graph. The L2 term covers
// the batch-touched base embedding rows (duplicates counted per sample) plus,
// when `relation_block_trainable` and at least one layer is active, the
// relation embeddings, derived intent embeddings, and mixture logits;
// cfg.l2_full swaps the batch rows for the full base tables.
LossVars build_total_loss(ad::Tape& t, const ForwardVars& fv, const Batch& batch,
                          const TrainConfig& cfg, bool relation_block_trainable);

// Pure total loss (no gradients): runs the forward and loss build on a
// throwaway tape over constant copies of the parameters.
double total_loss(const Batch& batch, const ModelParams& params, const GraphIndex& g,
                  const TrainConfig& cfg, LossBreakdown* breakdown = nullptr);

// Uniform draw over the items user u has NOT interacted with (rejection
// sampling). Throws SamplingError when no such item exists.
std::int32_t sample_negatives(std::int32_t u, const InteractionSet& cf,
                              std::mt19937_64& rng);

// Unbiased uniform integer in [0, n). Deterministic given the engine stream
// (avoids the implementation-defined std::uniform_int_distribution).
std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n);

// In-place Fisher-Yates shuffle driven by bounded_uniform (std::shuffle's
// sequence of draws is implementation-defined; this one is pinned).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_uniform(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double total = 0.0;     // sums over the epoch's batches
  double bpr = 0.0;
  double independence = 0.0;
  double l2 = 0.0;
  double mean_dcor = 0.0;  // mean pairwise distance correlation of intents
  bool evaluated = false;
  double recall = 0.0;
  double ndcg = 0.0;
};

struct FitResult {
  ModelParams params;  // best-evaluated parameters, or last if never evaluated
  std::vector<EpochRecord> log;
  bool aborted = false;
  std::string abort_reason;
  bool early_stopped = false;
  std::size_t best_epoch = 0;   // 1-based; 0 = no evaluation ran
  double best_recall = 0.0;
  std::size_t evals_run = 0;
};

// Full training loop: shuffled epochs over the training positives, Adam
// updates, periodic all-ranking evaluation with patience-based early stopping,
// best-parameter restore, and an abort path that restores the last completed
// epoch's parameters if the loss or a gradient goes non-finite. When
// `log_lines` is non-null one JSON object per epoch is written to it.
FitResult fit(const InteractionSet& train, const InteractionSet& test,
              const GraphIndex& g, const TrainConfig& cfg,
              std::ostream* log_lines = nullptr);

}  // namespace kgin
