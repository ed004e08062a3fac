// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/aggregate.hpp"

#include <string>

#include "kgin/error.hpp"
#include "kgin/kernels.hpp"

namespace kgin {

ParamVars lease_params(ad::Tape& t, ModelParams& p) {
  return {t.leaf(p.user_embs), t.leaf(p.entity_embs), t.leaf(p.relation_embs),
          t.leaf(p.intent_cfg.relation_logits)};
}

ParamVars const_params(ad::Tape& t, const ModelParams& p) {
  return {t.constant(p.user_embs.values), t.constant(p.entity_embs.values),
          t.constant(p.relation_embs.values), t.constant(p.intent_cfg.relation_logits.values)};
}

ForwardVars build_forward(ad::Tape& t, const ParamVars& pv, const GraphIndex& g,
                          const ForwardOpts& opts) {
  ForwardVars fv;
  fv.params = pv;
  if (t.value(pv.u0).rows != g.num_users || t.value(pv.v0).rows != g.num_entities ||
      t.value(pv.rels).rows != g.num_relations)
    throw ContractError("build_forward: parameter/graph size mismatch");

  const IntentVars iv = build_intents(t, pv.logits, pv.rels);
  fv.alpha = iv.alpha;
  fv.intent_embs = iv.embeddings;

  fv.user_layers.push_back(pv.u0);
  fv.entity_layers.push_back(pv.v0);

  if (opts.layers >= 1) {
    fv.beta = build_user_attention(t, pv.u0, fv.intent_embs);
    fv.mix = t.matmul(fv.beta, fv.intent_embs);  // (num_users, dim)
    if (opts.normalize_by_pairs) {
      const std::size_t P = t.value(fv.intent_embs).rows;
      fv.mix = t.scale(fv.mix, 1.0 / double(P));
    }
    for (std::size_t l = 1; l <= opts.layers; ++l) {
      const ad::VarId prev = fv.entity_layers[l - 1];
      const ad::VarId item_mean = t.neighbor_mean(prev, g.user_adj);
      fv.user_layers.push_back(t.mul(fv.mix, item_mean));
      fv.entity_layers.push_back(t.relational_mean(prev, pv.rels, g.entity_adj));
    }
  }

  fv.user_final = fv.user_layers[0];
  fv.entity_final = fv.entity_layers[0];
  for (std::size_t l = 1; l < fv.user_layers.size(); ++l) {
    fv.user_final = t.add(fv.user_final, fv.user_layers[l]);
    fv.entity_final = t.add(fv.entity_final, fv.entity_layers[l]);
  }
  return fv;
}

Mat aggregate_user_layer(const Mat& prev_entity_reps, const GraphIndex& g,
                         const IntentTable& intents, const Mat& beta, bool normalize_by_pairs) {
  if (beta.rows != g.num_users || beta.cols != intents.embeddings.rows)
    throw ContractError("aggregate_user_layer: beta shape mismatch");
  Mat mix;
  gemm(false, false, 1.0, beta, intents.embeddings, 0.0, mix);
  if (normalize_by_pairs)
    for (double& v : mix.a) v /= double(intents.embeddings.rows);
  const Mat item_mean = kernels::neighbor_mean(prev_entity_reps, g.user_adj);
  Mat out(mix.rows, mix.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.a[i] = mix.a[i] * item_mean.a[i];
  return out;
}

Mat aggregate_entity_layer(const Mat& prev_entity_reps, const GraphIndex& g,
                           const Mat& relation_embs) {
  if (relation_embs.rows != g.num_relations)
    throw ContractError("aggregate_entity_layer: relation table size mismatch");
  return kernels::relational_mean(prev_entity_reps, relation_embs, g.entity_adj);
}

LayerStates propagate(const ModelParams& p, const GraphIndex& g, const ForwardOpts& opts) {
  ad::Tape t;
  const ParamVars pv = const_params(t, p);
  const ForwardVars fv = build_forward(t, pv, g, opts);
  LayerStates s;
  for (ad::VarId v : fv.user_layers) s.user_reps.push_back(t.value(v));
  for (ad::VarId v : fv.entity_layers) s.entity_reps.push_back(t.value(v));
  return s;
}

FinalReps final_representations(const LayerStates& states, std::size_t num_items) {
  if (states.user_reps.empty() || states.entity_reps.empty())
    throw ContractError("final_representations: empty layer states");
  Mat users = states.user_reps[0];
  for (std::size_t l = 1; l < states.user_reps.size(); ++l)
    for (std::size_t i = 0; i < users.size(); ++i) users.a[i] += states.user_reps[l].a[i];
  Mat entities = states.entity_reps[0];
  for (std::size_t l = 1; l < states.entity_reps.size(); ++l)
    for (std::size_t i = 0; i < entities.size(); ++i) entities.a[i] += states.entity_reps[l].a[i];
  if (num_items > entities.rows)
    throw ContractError("final_representations: item prefix exceeds entity count");
  FinalReps out;
  out.users = std::move(users);
  out.items = Mat(num_items, entities.cols);
  for (std::size_t i = 0; i < num_items; ++i)
    std::copy(entities.row(i), entities.row(i) + entities.cols, out.items.row(i));
  return out;
}

FinalReps compute_final_reps(const ModelParams& p, const GraphIndex& g, const ForwardOpts& opts) {
  return final_representations(propagate(p, g, opts), g.num_items);
}

namespace {

std::size_t count_paths(const GraphIndex& g, std::int32_t v, std::size_t l, std::size_t cap) {
  if (l == 0) return 1;
  std::size_t n = 0;
  for (std::int64_t e = g.entity_adj.offsets[v]; e < g.entity_adj.offsets[v + 1]; ++e) {
    n += count_paths(g, g.entity_adj.nbr[e], l - 1, cap);
    if (n > cap) return n;
  }
  return n;
}

void walk_paths(const GraphIndex& g, const Mat& rel_embs, const Mat& entity0, std::int32_t v,
                std::size_t l, std::vector<double>& coef, Mat& out) {
  if (l == 0) {
    const double* e0 = entity0.row(std::size_t(v));
    for (std::size_t j = 0; j < out.cols; ++j) out(0, j) += coef[j] * e0[j];
    return;
  }
  const std::int64_t deg = g.entity_adj.deg(std::size_t(v));
  if (deg == 0) return;  // no paths continue through a sink
  std::vector<double> next(coef.size());
  for (std::int64_t e = g.entity_adj.offsets[v]; e < g.entity_adj.offsets[v + 1]; ++e) {
    const std::int32_t r = g.entity_adj.rel[e];
    const std::int32_t tnode = g.entity_adj.nbr[e];
    const double* rv = rel_embs.row(std::size_t(r));
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = coef[j] * rv[j] / double(deg);
    walk_paths(g, rel_embs, entity0, tnode, l - 1, next, out);
  }
}

}  // namespace

Mat enumerate_paths_oracle(const GraphIndex& g, const ModelParams& p, std::int32_t entity,
                           std::size_t l, std::size_t max_paths) {
  if (entity < 0 || std::size_t(entity) >= g.num_entities)
    throw LookupError("enumerate_paths_oracle: unknown entity " + std::to_string(entity));
  const std::size_t n = count_paths(g, entity, l, max_paths);
  if (n > max_paths)
    throw ContractError("enumerate_paths_oracle: path explosion (more than " +
                        std::to_string(max_paths) + " paths)");
  Mat out = Mat::zeros(1, p.meta.dim);
  std::vector<double> coef(p.meta.dim, 1.0);
  walk_paths(g, p.relation_embs.values, p.entity_embs.values, entity, l, coef, out);
  return out;
}

}  // namespace kgin
