// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "kgin/error.hpp"
#include "kgin/eval.hpp"
#include "kgin/independence.hpp"
#include "kgin/intent.hpp"

namespace kgin {

double score(std::int32_t u, std::int32_t i, const FinalReps& reps) {
  if (u < 0 || static_cast<std::size_t>(u) >= reps.users.rows)
    throw LookupError("score: user id " + std::to_string(u) + " out of range");
  if (i < 0 || static_cast<std::size_t>(i) >= reps.items.rows)
    throw LookupError("score: item id " + std::to_string(i) + " out of range");
  const double* ur = reps.users.row(static_cast<std::size_t>(u));
  const double* ir = reps.items.row(static_cast<std::size_t>(i));
  double s = 0.0;
  for (std::size_t c = 0; c < reps.users.cols; ++c) s += ur[c] * ir[c];
  return s;
}

double bpr_loss(const Batch& batch, const FinalReps& reps) {
  if (batch.users.size() != batch.pos.size() || batch.users.size() != batch.neg.size())
    throw ContractError("bpr_loss: batch vectors must have equal length");
  double total = 0.0;
  for (std::size_t s = 0; s < batch.users.size(); ++s) {
    const double margin =
        score(batch.users[s], batch.neg[s], reps) - score(batch.users[s], batch.pos[s], reps);
    total += ad::softplus_scalar(margin);
  }
  return total;
}

LossVars build_total_loss(ad::Tape& t, const ForwardVars& fv, const Batch& batch,
                          const TrainConfig& cfg, bool relation_block_trainable) {
  if (batch.users.size() != batch.pos.size() || batch.users.size() != batch.neg.size())
    throw ContractError("build_total_loss: batch vectors must have equal length");
  if (batch.users.empty()) throw ContractError("build_total_loss: empty batch");

  LossVars out;

  // Ranking term. Item ids index the entity table's prefix directly.
  const ad::VarId bu = t.gather_rows(fv.user_final, batch.users);
  const ad::VarId bp = t.gather_rows(fv.entity_final, batch.pos);
  const ad::VarId bn = t.gather_rows(fv.entity_final, batch.neg);
  const ad::VarId pos_scores = t.row_dot(bu, bp);
  const ad::VarId neg_scores = t.row_dot(bu, bn);
  out.bpr = t.sum(t.softplus(t.sub(neg_scores, pos_scores)));
  out.total = out.bpr;

  if (cfg.lambda1 > 0.0) {
    out.independence = cfg.independence == IndependenceKind::mutual_information
                           ? build_mi_loss(t, fv.intent_embs, cfg.tau)
                           : build_dcor_loss(t, fv.intent_embs);
    out.total = t.add(out.total, t.scale(out.independence, cfg.lambda1));
  }

  if (cfg.lambda2 > 0.0) {
    ad::VarId l2;
    if (cfg.l2_full) {
      l2 = t.add(t.dot(fv.params.u0, fv.params.u0), t.dot(fv.params.v0, fv.params.v0));
    } else {
      const ad::VarId ru = t.gather_rows(fv.params.u0, batch.users);
      const ad::VarId rp = t.gather_rows(fv.params.v0, batch.pos);
      const ad::VarId rn = t.gather_rows(fv.params.v0, batch.neg);
      l2 = t.add(t.add(t.dot(ru, ru), t.dot(rp, rp)), t.dot(rn, rn));
    }
    if (relation_block_trainable) {
      l2 = t.add(l2, t.dot(fv.params.rels, fv.params.rels));
      l2 = t.add(l2, t.dot(fv.intent_embs, fv.intent_embs));
      l2 = t.add(l2, t.dot(fv.params.logits, fv.params.logits));
    }
    out.l2 = l2;
    out.total = t.add(out.total, t.scale(out.l2, cfg.lambda2));
  }
  return out;
}

double total_loss(const Batch& batch, const ModelParams& params, const GraphIndex& g,
                  const TrainConfig& cfg, LossBreakdown* breakdown) {
  ad::Tape t;
  const ParamVars pv = const_params(t, params);
  const ForwardOpts opts{cfg.layers, cfg.normalize_by_pairs};
  const ForwardVars fv = build_forward(t, pv, g, opts);
  const bool relation_block = cfg.layers >= 1 && !params.relation_embs.frozen;
  const LossVars lv = build_total_loss(t, fv, batch, cfg, relation_block);
  const double total = t.value(lv.total)(0, 0);
  if (breakdown != nullptr) {
    breakdown->total = total;
    breakdown->bpr = t.value(lv.bpr)(0, 0);
    breakdown->independence =
        lv.independence == ad::kInvalidVar ? 0.0 : t.value(lv.independence)(0, 0);
    breakdown->l2 = lv.l2 == ad::kInvalidVar ? 0.0 : t.value(lv.l2)(0, 0);
  }
  return total;
}

std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw ContractError("bounded_uniform: n must be >= 1");
  // Rejection on the short tail keeps the draw exactly uniform.
  const std::uint64_t threshold = (std::uint64_t{0} - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

std::int32_t sample_negatives(std::int32_t u, const InteractionSet& cf,
                              std::mt19937_64& rng) {
  if (u < 0 || static_cast<std::size_t>(u) >= cf.num_users)
    throw LookupError("sample_negatives: user id " + std::to_string(u) + " out of range");
  const auto& pos = cf.positives[static_cast<std::size_t>(u)];
  if (pos.size() >= cf.num_items)
    throw SamplingError("sample_negatives: user " + std::to_string(u) +
                        " has interacted with every item");
  for (;;) {
    const auto cand = static_cast<std::int32_t>(bounded_uniform(rng, cf.num_items));
    if (!std::binary_search(pos.begin(), pos.end(), cand)) return cand;
  }
}

namespace {

// splitmix64 step, used to derive independent named streams from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9e3779b97f4a7c15ull + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void write_epoch_line(std::ostream* out, const EpochRecord& rec) {
  if (out == nullptr) return;
  nlohmann::json j;
  j["epoch"] = rec.epoch;
  j["total"] = rec.total;
  j["bpr"] = rec.bpr;
  j["independence"] = rec.independence;
  j["l2"] = rec.l2;
  j["mean_dcor"] = rec.mean_dcor;
  if (rec.evaluated) {
    j["recall"] = rec.recall;
    j["ndcg"] = rec.ndcg;
  }
  *out << j.dump() << "\n";
}

}  // namespace

FitResult fit(const InteractionSet& train, const InteractionSet& test,
              const GraphIndex& g, const TrainConfig& cfg, std::ostream* log_lines) {
  if (train.num_users != g.num_users || train.num_items != g.num_items)
    throw ContractError("fit: interaction set and graph index disagree on sizes");

  ModelMeta meta;
  meta.num_users = g.num_users;
  meta.num_items = g.num_items;
  meta.num_entities = g.num_entities;
  meta.num_relations = g.num_relations;
  meta.dim = cfg.dim;
  meta.layers = cfg.layers;
  meta.normalize_by_pairs = cfg.normalize_by_pairs;

  const bool unit_frozen = cfg.variant == Variant::no_relations_no_intents;

  FitResult result;
  result.params = init_model_params(meta, cfg.num_intents, cfg.seed, unit_frozen);
  ModelParams& params = result.params;

  std::vector<std::pair<std::int32_t, std::int32_t>> positives;
  positives.reserve(train.total_interactions());
  for (std::size_t u = 0; u < train.positives.size(); ++u) {
    for (std::int32_t i : train.positives[u]) {
      positives.emplace_back(static_cast<std::int32_t>(u), i);
    }
  }

  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 1));
  std::mt19937_64 neg_rng(derive_seed(cfg.seed, 2));

  const ForwardOpts opts{cfg.layers, cfg.normalize_by_pairs};
  const bool relation_block = cfg.layers >= 1 && !params.relation_embs.frozen;
  const AdamConfig adam = cfg.adam();
  const std::string fingerprint = config_fingerprint(cfg);
  const bool can_eval = cfg.eval_every > 0 && test.total_interactions() > 0;

  ModelParams last_good = params;  // restored if an update goes non-finite
  ModelParams best = params;
  double best_recall = -1.0;
  std::size_t best_epoch = 0;
  std::size_t evals_since_improve = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs && !positives.empty(); ++epoch) {
    deterministic_shuffle(positives, shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    bool epoch_ok = true;

    for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(positives.size(), start + cfg.batch_size);
      Batch batch;
      batch.users.reserve(stop - start);
      batch.pos.reserve(stop - start);
      batch.neg.reserve(stop - start);
      for (std::size_t s = start; s < stop; ++s) {
        batch.users.push_back(positives[s].first);
        batch.pos.push_back(positives[s].second);
        batch.neg.push_back(sample_negatives(positives[s].first, train, neg_rng));
      }

      params.zero_grads();
      ad::Tape t;
      const ParamVars pv = lease_params(t, params);
      const ForwardVars fv = build_forward(t, pv, g, opts);
      const LossVars lv = build_total_loss(t, fv, batch, cfg, relation_block);

      const double total = t.value(lv.total)(0, 0);
      if (!std::isfinite(total)) {
        result.aborted = true;
        result.abort_reason = "non-finite loss at epoch " + std::to_string(epoch + 1);
        epoch_ok = false;
        break;
      }
      try {
        t.backward(lv.total);
        adam_step(params.tables(), adam);
      } catch (const NumericError& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        epoch_ok = false;
        break;
      }

      rec.total += total;
      rec.bpr += t.value(lv.bpr)(0, 0);
      if (lv.independence != ad::kInvalidVar) rec.independence += t.value(lv.independence)(0, 0);
      if (lv.l2 != ad::kInvalidVar) rec.l2 += t.value(lv.l2)(0, 0);
    }

    if (!epoch_ok) {
      params = last_good;
      break;
    }
    last_good = params;

    const IntentTable intents = compute_intents(params.intent_cfg, params.relation_embs);
    rec.mean_dcor = mean_pairwise_dcor(intents.embeddings);

    if (can_eval && (epoch + 1) % cfg.eval_every == 0) {
      const FinalReps reps = compute_final_reps(params, g, opts);
      const EvalReport report = evaluate(reps, train, test, cfg.k, fingerprint);
      rec.evaluated = true;
      rec.recall = report.recall;
      rec.ndcg = report.ndcg;
      ++result.evals_run;
      if (report.recall > best_recall) {
        best_recall = report.recall;
        best = params;
        best_epoch = epoch + 1;
        evals_since_improve = 0;
      } else {
        ++evals_since_improve;
      }
      if (evals_since_improve >= cfg.patience) {
        result.early_stopped = true;
        write_epoch_line(log_lines, rec);
        result.log.push_back(rec);
        break;
      }
    }

    write_epoch_line(log_lines, rec);
    result.log.push_back(rec);
  }

  if (best_epoch > 0) {
    result.params = best;
    result.best_epoch = best_epoch;
    result.best_recall = best_recall;
  }
  return result;
}

}  // namespace kgin
