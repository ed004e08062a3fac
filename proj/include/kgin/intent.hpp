// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kgin/mat.hpp"
#include "kgin/params.hpp"
#include "kgin/tape.hpp"

namespace kgin {

// Derived intent state: each intent embedding is the attention-weighted
// combination of relation embeddings; attention is a per-intent softmax over
// relations of the trainable logits.
struct IntentTable {
  Mat embeddings;  // (num_intents, dim)
  Mat attention;   // (num_relations, num_intents), columns sum to 1
};

struct IntentVars {
  ad::VarId alpha;       // (num_relations, num_intents)
  ad::VarId embeddings;  // (num_intents, dim)
};

// Tape builders — the one code path for intent math, shared by training and
// inference wrappers.
IntentVars build_intents(ad::Tape& t, ad::VarId relation_logits, ad::VarId relation_embs);

// Per-row softmax over intents of (user_emb . intent_emb) scores. user0_rows
// may hold any number of rows (all users during training, one for explain).
ad::VarId build_user_attention(ad::Tape& t, ad::VarId user0_rows, ad::VarId intent_embs);

// Pure wrappers running the builders on a throwaway tape.
IntentTable compute_intents(const IntentConfig& cfg, const ParamTable& relation_embs);
Mat user_intent_attention(const Mat& user0_rows, const IntentTable& intents);

}  // namespace kgin
