// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/eval.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "kgin/error.hpp"

namespace kgin {

std::string eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["recall"] = r.recall;
  j["ndcg"] = r.ndcg;
  j["users_evaluated"] = r.users_evaluated;
  j["users_skipped"] = r.users_skipped;
  j["config_fingerprint"] = r.config_fingerprint;
  return j.dump(2);
}

std::vector<std::int32_t> rank_all(std::int32_t u, const FinalReps& reps,
                                   const InteractionSet& train_mask) {
  if (u < 0 || static_cast<std::size_t>(u) >= reps.users.rows)
    throw LookupError("rank_all: user id " + std::to_string(u) + " out of range");
  const std::size_t num_items = reps.items.rows;
  const std::size_t d = reps.users.cols;
  const double* urow = reps.users.row(static_cast<std::size_t>(u));

  std::vector<bool> masked(num_items, false);
  if (static_cast<std::size_t>(u) < train_mask.positives.size()) {
    for (std::int32_t i : train_mask.positives[static_cast<std::size_t>(u)]) {
      if (i >= 0 && static_cast<std::size_t>(i) < num_items) masked[static_cast<std::size_t>(i)] = true;
    }
  }

  std::vector<double> score(num_items, 0.0);
  for (std::size_t i = 0; i < num_items; ++i) {
    const double* irow = reps.items.row(i);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += urow[c] * irow[c];
    score[i] = s;
  }

  std::vector<std::int32_t> order;
  order.reserve(num_items);
  for (std::size_t i = 0; i < num_items; ++i) {
    if (!masked[i]) order.push_back(static_cast<std::int32_t>(i));
  }
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const double sa = score[static_cast<std::size_t>(a)];
    const double sb = score[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;  // ties toward the smaller item id
  });
  return order;
}

namespace {

bool contains_sorted(const std::vector<std::int32_t>& sorted, std::int32_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace

double recall_at_k(const std::vector<std::int32_t>& ranking,
                   const std::vector<std::int32_t>& test_pos, std::size_t k) {
  if (test_pos.empty()) throw ContractError("recall_at_k: empty test positives");
  if (k == 0) throw ContractError("recall_at_k: k must be >= 1");
  const std::size_t top = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t m = 0; m < top; ++m) {
    if (contains_sorted(test_pos, ranking[m])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test_pos.size());
}

double ndcg_at_k(const std::vector<std::int32_t>& ranking,
                 const std::vector<std::int32_t>& test_pos, std::size_t k) {
  if (test_pos.empty()) throw ContractError("ndcg_at_k: empty test positives");
  if (k == 0) throw ContractError("ndcg_at_k: k must be >= 1");
  const std::size_t top = std::min(k, ranking.size());
  double dcg = 0.0;
  for (std::size_t m = 0; m < top; ++m) {
    if (contains_sorted(test_pos, ranking[m])) {
      dcg += 1.0 / std::log2(static_cast<double>(m) + 2.0);  // rank m+1
    }
  }
  const std::size_t ideal = std::min(k, test_pos.size());
  double idcg = 0.0;
  for (std::size_t m = 1; m <= ideal; ++m) {
    idcg += 1.0 / std::log2(static_cast<double>(m) + 1.0);
  }
  return dcg / idcg;
}

EvalReport evaluate(const FinalReps& reps, const InteractionSet& train,
                    const InteractionSet& test, std::size_t k,
                    const std::string& fingerprint, unsigned threads) {
  if (k == 0) throw ContractError("evaluate: k must be >= 1");
  const std::size_t num_items = reps.items.rows;

  EvalReport report;
  report.k = k;
  report.config_fingerprint = fingerprint;

  // Sequential pass: decide per user whether it is evaluable, and with which
  // in-range positives. Keeps the skip counter deterministic and lets the
  // parallel section touch evaluated users only.
  std::vector<std::int32_t> eval_users;
  std::vector<std::vector<std::int32_t>> eval_pos;
  for (std::size_t u = 0; u < test.positives.size(); ++u) {
    const auto& raw = test.positives[u];
    if (raw.empty()) continue;  // user absent from the test split
    if (u >= reps.users.rows)
      throw DataError("evaluate: test user id " + std::to_string(u) +
                      " has no trained representation");
    std::vector<std::int32_t> in_range;
    for (std::int32_t i : raw) {
      if (i >= 0 && static_cast<std::size_t>(i) < num_items) in_range.push_back(i);
    }
    if (in_range.empty()) {
      ++report.users_skipped;
      continue;
    }
    eval_users.push_back(static_cast<std::int32_t>(u));
    eval_pos.push_back(std::move(in_range));
  }
  if (eval_users.empty())
    throw DataError("evaluate: no users with usable test positives");

  const std::size_t n = eval_users.size();
  std::vector<double> rec(n, 0.0), nd(n, 0.0);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const std::vector<std::int32_t> ranking = rank_all(eval_users[s], reps, train);
      rec[s] = recall_at_k(ranking, eval_pos[s], k);
      nd[s] = ndcg_at_k(ranking, eval_pos[s], k);
    }
  };
  if (threads <= 1 || n < 2) {
    work(0, n);
  } else {
    const unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  // Ordered reduction: the sum is taken in user order regardless of threads.
  double rsum = 0.0, nsum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    rsum += rec[s];
    nsum += nd[s];
  }
  report.users_evaluated = n;
  report.recall = rsum / static_cast<double>(n);
  report.ndcg = nsum / static_cast<double>(n);
  return report;
}

TrainConfig make_ablation(const TrainConfig& base, Variant v) {
  TrainConfig cfg = base;
  cfg.variant = v;
  switch (v) {
    case Variant::full:
      break;
    case Variant::no_intents:
      cfg.num_intents = 1;
      cfg.lambda1 = 0.0;
      break;
    case Variant::no_relations_no_intents:
      cfg.num_intents = 1;
      cfg.lambda1 = 0.0;
      break;
    case Variant::mf:
      cfg.num_intents = 1;
      cfg.lambda1 = 0.0;
      cfg.layers = 0;
      break;
  }
  return cfg;
}

ModelParams apply_scoring_variant(const ModelParams& params, Variant v) {
  ModelParams out = params;
  switch (v) {
    case Variant::full:
      break;
    case Variant::no_intents:
      // Uniform relation mixture; all intents collapse to the mean relation
      // embedding, so user attention over them is uniform as well.
      out.intent_cfg.relation_logits.values.fill(0.0);
      break;
    case Variant::no_relations_no_intents:
      out.relation_embs.values.fill(1.0);
      out.intent_cfg.relation_logits.values.fill(0.0);
      break;
    case Variant::mf:
      out.meta.layers = 0;
      break;
  }
  return out;
}

}  // namespace kgin
