// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgin/aggregate.hpp"
#include "kgin/config.hpp"
#include "kgin/interaction_set.hpp"

namespace kgin {

struct EvalReport {
  std::size_t k = 20;
  double recall = 0.0;
  double ndcg = 0.0;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;  // users whose test positives are all out of range
  std::string config_fingerprint;
};

std::string eval_report_to_json(const EvalReport& r);

// Full ranking of the items user u has not interacted with in `train_mask`,
// best first. Ties break toward the smaller item id (exact score compare).
std::vector<std::int32_t> rank_all(std::int32_t u, const FinalReps& reps,
                                   const InteractionSet& train_mask);

// `ranking` is best-first over candidate items; `test_pos` must be sorted.
double recall_at_k(const std::vector<std::int32_t>& ranking,
                   const std::vector<std::int32_t>& test_pos, std::size_t k);
double ndcg_at_k(const std::vector<std::int32_t>& ranking,
                 const std::vector<std::int32_t>& test_pos, std::size_t k);

// All-ranking protocol: for every test user, rank all items outside the
// training positives and average recall@k / ndcg@k over evaluated users.
// `threads` > 1 parallelizes over users; results are bit-identical to the
// single-threaded run (per-user slots, ordered reduction).
EvalReport evaluate(const FinalReps& reps, const InteractionSet& train,
                    const InteractionSet& test, std::size_t k,
                    const std::string& fingerprint = "", unsigned threads = 1);

// Derive an ablation config from a base config.
TrainConfig make_ablation(const TrainConfig& base, Variant v);

// Scoring-time ablation of an already-trained model (used by `kgin eval`).
ModelParams apply_scoring_variant(const ModelParams& params, Variant v);

}  // namespace kgin
