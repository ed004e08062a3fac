// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kgin/mat.hpp"

namespace kgin {

// One named trainable matrix with its gradient buffer and Adam moments.
struct ParamTable {
  std::string name;
  Mat values;
  Mat grads;
  Mat m, v;  // Adam first/second moments
  std::int64_t steps = 0;
  bool frozen = false;

  void init_shape(std::size_t rows, std::size_t cols) {
    values = Mat::zeros(rows, cols);
    grads = Mat::zeros(rows, cols);
    m = Mat::zeros(rows, cols);
    v = Mat::zeros(rows, cols);
  }
  void zero_grads() { grads.fill(0.0); }
};

// Structural description of a model instance.
struct ModelMeta {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // inverse-doubled
  std::size_t dim = 64;
  std::size_t layers = 3;
  bool normalize_by_pairs = false;  // divide user aggregation by |P| * degree
};

struct IntentConfig {
  std::size_t num_intents = 4;
  ParamTable relation_logits;  // (num_relations, num_intents)
};

// All trainable state. Intent embeddings are derived (attention-weighted
// combinations of relation embeddings), not free parameters.
struct ModelParams {
  ModelMeta meta;
  ParamTable user_embs;      // (num_users, dim)
  ParamTable entity_embs;    // (num_entities, dim)
  ParamTable relation_embs;  // (num_relations, dim)
  IntentConfig intent_cfg;

  std::vector<ParamTable*> tables() {
    return {&user_embs, &entity_embs, &relation_embs, &intent_cfg.relation_logits};
  }
  std::vector<const ParamTable*> tables() const {
    return {&user_embs, &entity_embs, &relation_embs, &intent_cfg.relation_logits};
  }
  void zero_grads() {
    for (auto* t : tables()) t->zero_grads();
  }
};

// Xavier-uniform embeddings and relation logits, from one seeded generator.
// unit_frozen_relations swaps relation embeddings for frozen all-ones vectors
// and zero frozen logits (the relation-free ablation).
ModelParams init_model_params(const ModelMeta& meta, std::size_t num_intents, std::uint64_t seed,
                              bool unit_frozen_relations = false);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update over every non-frozen table; gradients must be finite
// (NumericError names the offending table otherwise). Frozen tables are
// untouched. Gradients are left as-is; callers zero them per step.
void adam_step(std::vector<ParamTable*> tables, const AdamConfig& cfg);

// Versioned little-endian binary checkpoint: meta + every table's values and
// moments. Bit-identical for bit-identical states.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace kgin
