// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "kgin/graph_index.hpp"
#include "kgin/intent.hpp"
#include "kgin/mat.hpp"
#include "kgin/params.hpp"
#include "kgin/tape.hpp"

namespace kgin {

// Per-layer representations, layer 0 being the raw embedding tables.
struct LayerStates {
  std::vector<Mat> user_reps;    // layers + 1 matrices (num_users, dim)
  std::vector<Mat> entity_reps;  // layers + 1 matrices (num_entities, dim)
};

// Sum over layers; items are the prefix slice of the entity space.
struct FinalReps {
  Mat users;  // (num_users, dim)
  Mat items;  // (num_items, dim)
};

struct ForwardOpts {
  std::size_t layers = 3;
  bool normalize_by_pairs = false;  // divide user aggregation by |P| * degree
};

struct ParamVars {
  ad::VarId u0, v0, rels, logits;
};

// Bind parameter tables onto a tape: as gradient-receiving leaves (training)
// or as constants (pure inference).
ParamVars lease_params(ad::Tape& t, ModelParams& p);
ParamVars const_params(ad::Tape& t, const ModelParams& p);

struct ForwardVars {
  ParamVars params;
  ad::VarId alpha = -1;        // (num_relations, P)
  ad::VarId intent_embs = -1;  // (P, dim)
  ad::VarId beta = -1;         // (num_users, P); layer-0 user embeddings always
  ad::VarId mix = -1;          // (num_users, dim) beta-weighted intent mixture
  std::vector<ad::VarId> user_layers, entity_layers;  // layers + 1 each
  ad::VarId user_final = -1, entity_final = -1;       // sums over layers
};

// The complete differentiable forward pass: derived intents, per-user intent
// attention (from layer-0 user embeddings), `layers` rounds of message
// passing, and final representations as the sum over layers. No
// nonlinearities, no feature transforms, no self-loops; degree-0 nodes stay
// zero. Entity layers aggregate relation-modulated neighbor means over the
// knowledge graph only; user layers modulate the mean of their items'
// previous-layer representations by the intent mixture.
ForwardVars build_forward(ad::Tape& t, const ParamVars& pv, const GraphIndex& g,
                          const ForwardOpts& opts);

// Pure single-layer aggregations (same kernels as the tape path).
Mat aggregate_user_layer(const Mat& prev_entity_reps, const GraphIndex& g,
                         const IntentTable& intents, const Mat& beta,
                         bool normalize_by_pairs = false);
Mat aggregate_entity_layer(const Mat& prev_entity_reps, const GraphIndex& g,
                           const Mat& relation_embs);

// Pure full propagation and final representations.
LayerStates propagate(const ModelParams& p, const GraphIndex& g, const ForwardOpts& opts);
FinalReps final_representations(const LayerStates& states, std::size_t num_items);
FinalReps compute_final_reps(const ModelParams& p, const GraphIndex& g, const ForwardOpts& opts);

// Exhaustive-path oracle for one entity's layer-l representation: sums, over
// every directed l-hop path out of `entity`, the elementwise product of the
// relation embeddings along the path and the endpoint's layer-0 embedding,
// divided by the product of the expanding nodes' degrees. Refuses graphs with
// more than max_paths paths. Independent of the tape/kernels code paths.
Mat enumerate_paths_oracle(const GraphIndex& g, const ModelParams& p, std::int32_t entity,
                           std::size_t l, std::size_t max_paths = 1000000);

}  // namespace kgin
