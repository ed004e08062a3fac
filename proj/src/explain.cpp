// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/explain.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "kgin/error.hpp"
#include "kgin/intent.hpp"
#include "kgin/train.hpp"

namespace kgin {

std::vector<IntentProfile> intent_profiles(const ModelParams& params) {
  const IntentTable intents = compute_intents(params.intent_cfg, params.relation_embs);
  const Mat& alpha = intents.attention;  // (num_relations, num_intents)
  std::vector<IntentProfile> profiles(alpha.cols);
  for (std::size_t p = 0; p < alpha.cols; ++p) {
    profiles[p].intent = p;
    profiles[p].relations.resize(alpha.rows);
    for (std::size_t r = 0; r < alpha.rows; ++r) {
      profiles[p].relations[r] = {static_cast<std::int32_t>(r), alpha(r, p)};
    }
    std::sort(profiles[p].relations.begin(), profiles[p].relations.end(),
              [](const RelationWeight& a, const RelationWeight& b) {
                if (a.weight != b.weight) return a.weight > b.weight;
                return a.relation < b.relation;
              });
  }
  return profiles;
}

Explanation explain_interaction(const ModelParams& params, const GraphIndex& g,
                                const FinalReps& reps, std::int32_t u, std::int32_t i) {
  if (u < 0 || static_cast<std::size_t>(u) >= params.meta.num_users)
    throw LookupError("explain: user id " + std::to_string(u) + " out of range");
  if (i < 0 || static_cast<std::size_t>(i) >= params.meta.num_items)
    throw LookupError("explain: item id " + std::to_string(i) + " out of range");
  (void)g;  // reserved for future path-level evidence; ids validated via meta

  Explanation e;
  e.user = u;
  e.item = i;
  e.score = score(u, i, reps);

  const IntentTable intents = compute_intents(params.intent_cfg, params.relation_embs);
  Mat u0(1, params.meta.dim);
  const double* src = params.user_embs.values.row(static_cast<std::size_t>(u));
  std::copy(src, src + params.meta.dim, u0.a.begin());
  const Mat beta = user_intent_attention(u0, intents);  // (1, P)

  e.intents_ranked.resize(beta.cols);
  for (std::size_t p = 0; p < beta.cols; ++p) e.intents_ranked[p] = {p, beta(0, p)};
  std::sort(e.intents_ranked.begin(), e.intents_ranked.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });

  const std::vector<IntentProfile> profiles = intent_profiles(params);
  e.top_intent = profiles[e.intents_ranked.front().first];
  return e;
}

Explanation explain_interaction(const ModelParams& params, const GraphIndex& g,
                                std::int32_t u, std::int32_t i) {
  const ForwardOpts opts{params.meta.layers, params.meta.normalize_by_pairs};
  const FinalReps reps = compute_final_reps(params, g, opts);
  return explain_interaction(params, g, reps, u, i);
}

namespace {

std::string relation_label(std::int32_t id, const std::vector<std::string>* names) {
  if (names != nullptr && id >= 0 && static_cast<std::size_t>(id) < names->size() &&
      !(*names)[static_cast<std::size_t>(id)].empty()) {
    return (*names)[static_cast<std::size_t>(id)];
  }
  return "r" + std::to_string(id);
}

std::size_t profile_cut(const IntentProfile& profile, std::size_t top) {
  return top > 0 ? std::min(top, profile.relations.size()) : profile.relations.size();
}

}  // namespace

std::string explanation_to_json(const Explanation& e,
                                const std::vector<std::string>* relation_names,
                                std::size_t top) {
  nlohmann::json j;
  j["user"] = e.user;
  j["item"] = e.item;
  j["score"] = e.score;
  j["intents"] = nlohmann::json::array();
  for (const auto& [p, w] : e.intents_ranked) {
    j["intents"].push_back({{"intent", p}, {"weight", w}});
  }
  j["top_intent"]["intent"] = e.top_intent.intent;
  j["top_intent"]["relations"] = nlohmann::json::array();
  const std::size_t cut = profile_cut(e.top_intent, top);
  for (std::size_t n = 0; n < cut; ++n) {
    const RelationWeight& rw = e.top_intent.relations[n];
    j["top_intent"]["relations"].push_back({{"relation", rw.relation},
                                            {"name", relation_label(rw.relation, relation_names)},
                                            {"weight", rw.weight}});
  }
  return j.dump(2);
}

std::string explanation_to_text(const Explanation& e,
                                const std::vector<std::string>* relation_names,
                                std::size_t top) {
  std::ostringstream out;
  out << "user " << e.user << " x item " << e.item << ": score " << e.score << "\n";
  out << "intent attention:";
  for (const auto& [p, w] : e.intents_ranked) out << "  #" << p << "=" << w;
  out << "\n";
  out << "top intent #" << e.top_intent.intent << " relation profile:";
  const std::size_t cut = profile_cut(e.top_intent, top);
  for (std::size_t n = 0; n < cut; ++n) {
    const RelationWeight& rw = e.top_intent.relations[n];
    out << "  " << relation_label(rw.relation, relation_names) << "=" << rw.weight;
  }
  out << "\n";
  return out.str();
}

}  // namespace kgin
