// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/intent.hpp"

#include "kgin/error.hpp"

namespace kgin {

IntentVars build_intents(ad::Tape& t, ad::VarId relation_logits, ad::VarId relation_embs) {
  const Mat& w = t.value(relation_logits);
  const Mat& r = t.value(relation_embs);
  if (w.rows == 0) throw ContractError("build_intents: empty relation set");
  if (w.cols == 0) throw ContractError("build_intents: need at least one intent");
  if (w.rows != r.rows) throw ContractError("build_intents: logits/relation row mismatch");
  IntentVars iv;
  iv.alpha = t.softmax_cols(relation_logits);              // per-intent over relations
  iv.embeddings = t.matmul(iv.alpha, relation_embs, true); // (P, d) = alpha^T * rels
  return iv;
}

ad::VarId build_user_attention(ad::Tape& t, ad::VarId user0_rows, ad::VarId intent_embs) {
  const Mat& u = t.value(user0_rows);
  const Mat& e = t.value(intent_embs);
  if (u.cols != e.cols) throw ContractError("build_user_attention: dim mismatch");
  ad::VarId scores = t.matmul(user0_rows, intent_embs, false, true);  // (n, P)
  return t.softmax_rows(scores);
}

IntentTable compute_intents(const IntentConfig& cfg, const ParamTable& relation_embs) {
  if (relation_embs.values.rows == 0) throw ContractError("compute_intents: empty relation set");
  if (cfg.num_intents == 0) throw ContractError("compute_intents: need at least one intent");
  if (cfg.relation_logits.values.rows != relation_embs.values.rows ||
      cfg.relation_logits.values.cols != cfg.num_intents)
    throw ContractError("compute_intents: relation_logits shape mismatch");
  ad::Tape t;
  const ad::VarId w = t.constant(cfg.relation_logits.values);
  const ad::VarId r = t.constant(relation_embs.values);
  const IntentVars iv = build_intents(t, w, r);
  return {t.value(iv.embeddings), t.value(iv.alpha)};
}

Mat user_intent_attention(const Mat& user0_rows, const IntentTable& intents) {
  ad::Tape t;
  const ad::VarId u = t.constant(user0_rows);
  const ad::VarId e = t.constant(intents.embeddings);
  return t.value(build_user_attention(t, u, e));
}

}  // namespace kgin
