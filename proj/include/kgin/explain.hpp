// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgin/aggregate.hpp"
#include "kgin/graph_index.hpp"
#include "kgin/params.hpp"

namespace kgin {

struct RelationWeight {
  std::int32_t relation = 0;
  double weight = 0.0;
};

// One intent's relation mixture, heaviest relation first (ties toward the
// smaller relation id). Weights are a softmax column and sum to 1.
struct IntentProfile {
  std::size_t intent = 0;
  std::vector<RelationWeight> relations;
};

std::vector<IntentProfile> intent_profiles(const ModelParams& params);

struct Explanation {
  std::int32_t user = 0;
  std::int32_t item = 0;
  double score = 0.0;
  // (intent id, attention weight), strongest first; ties toward smaller id.
  std::vector<std::pair<std::size_t, double>> intents_ranked;
  IntentProfile top_intent;
};

// Why does user u score item i the way it does: the user's intent attention
// (from layer-0 embeddings, matching training) ranked by weight, plus the
// relation profile of the dominant intent. Unknown ids are lookup errors.
Explanation explain_interaction(const ModelParams& params, const GraphIndex& g,
                                const FinalReps& reps, std::int32_t u, std::int32_t i);
// Convenience overload that derives the final representations itself.
Explanation explain_interaction(const ModelParams& params, const GraphIndex& g,
                                std::int32_t u, std::int32_t i);

// Renderers. `relation_names` (optional) maps relation id -> display name;
// ids without a name fall back to "r<id>". `top` > 0 truncates the profile.
std::string explanation_to_json(const Explanation& e,
                                const std::vector<std::string>* relation_names = nullptr,
                                std::size_t top = 0);
std::string explanation_to_text(const Explanation& e,
                                const std::vector<std::string>* relation_names = nullptr,
                                std::size_t top = 0);

}  // namespace kgin
