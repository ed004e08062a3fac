// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgin/error.hpp"

namespace kgin {

using nlohmann::json;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_intents: return "no_intents";
    case Variant::no_relations_no_intents: return "no_relations_no_intents";
    case Variant::mf: return "mf";
  }
  throw ContractError("to_string: bad Variant value");
}

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::full;
  if (s == "no_intents") return Variant::no_intents;
  if (s == "no_relations_no_intents") return Variant::no_relations_no_intents;
  if (s == "mf") return Variant::mf;
  throw ParseError("unknown variant '" + s +
                   "' (expected full, no_intents, no_relations_no_intents, or mf)");
}

std::string to_string(IndependenceKind k) {
  switch (k) {
    case IndependenceKind::mutual_information: return "mutual_information";
    case IndependenceKind::distance_correlation: return "distance_correlation";
  }
  throw ContractError("to_string: bad IndependenceKind value");
}

IndependenceKind parse_independence(const std::string& s) {
  if (s == "mutual_information") return IndependenceKind::mutual_information;
  if (s == "distance_correlation") return IndependenceKind::distance_correlation;
  throw ParseError("unknown independence kind '" + s +
                   "' (expected mutual_information or distance_correlation)");
}

namespace {

json parse_object(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(std::string(what) + ": top-level JSON must be an object");
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
void take(json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
  j.erase(it);
}

void reject_unknown_keys(const json& j, const char* what) {
  if (j.empty()) return;
  std::string keys;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.empty()) keys += ", ";
    keys += it.key();
  }
  throw ParseError(std::string(what) + ": unknown key(s): " + keys);
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text) {
  json j = parse_object(text, "train config");
  TrainConfig cfg;
  take(j, "dim", cfg.dim);
  take(j, "layers", cfg.layers);
  take(j, "num_intents", cfg.num_intents);
  take(j, "batch_size", cfg.batch_size);
  take(j, "epochs", cfg.epochs);
  take(j, "lr", cfg.lr);
  take(j, "lambda1", cfg.lambda1);
  take(j, "lambda2", cfg.lambda2);
  take(j, "tau", cfg.tau);
  std::string ind = to_string(cfg.independence);
  take(j, "independence", ind);
  cfg.independence = parse_independence(ind);
  std::string var = to_string(cfg.variant);
  take(j, "variant", var);
  cfg.variant = parse_variant(var);
  take(j, "seed", cfg.seed);
  take(j, "eval_every", cfg.eval_every);
  take(j, "patience", cfg.patience);
  take(j, "k", cfg.k);
  take(j, "normalize_by_pairs", cfg.normalize_by_pairs);
  take(j, "l2_full", cfg.l2_full);
  take(j, "deterministic", cfg.deterministic);
  reject_unknown_keys(j, "train config");
  if (cfg.dim == 0) throw ParseError("train config: dim must be >= 1");
  if (cfg.num_intents == 0) throw ParseError("train config: num_intents must be >= 1");
  if (cfg.batch_size == 0) throw ParseError("train config: batch_size must be >= 1");
  if (cfg.tau <= 0.0) throw ParseError("train config: tau must be > 0");
  if (cfg.lr <= 0.0) throw ParseError("train config: lr must be > 0");
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0)
    throw ParseError("train config: lambda1 and lambda2 must be >= 0");
  return cfg;
}

TrainConfig train_config_from_json_file(const std::string& path) {
  return train_config_from_json(read_file(path));
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["dim"] = cfg.dim;
  j["layers"] = cfg.layers;
  j["num_intents"] = cfg.num_intents;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["lr"] = cfg.lr;
  j["lambda1"] = cfg.lambda1;
  j["lambda2"] = cfg.lambda2;
  j["tau"] = cfg.tau;
  j["independence"] = to_string(cfg.independence);
  j["variant"] = to_string(cfg.variant);
  j["seed"] = cfg.seed;
  j["eval_every"] = cfg.eval_every;
  j["patience"] = cfg.patience;
  j["k"] = cfg.k;
  j["normalize_by_pairs"] = cfg.normalize_by_pairs;
  j["l2_full"] = cfg.l2_full;
  j["deterministic"] = cfg.deterministic;
  return j.dump(2);
}

std::string config_fingerprint(const TrainConfig& cfg) {
  const std::string canon = train_config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

SynthSpec synth_spec_from_json(const std::string& text) {
  json j = parse_object(text, "synth spec");
  SynthSpec s;
  take(j, "num_users", s.num_users);
  take(j, "num_items", s.num_items);
  take(j, "num_entities", s.num_entities);
  take(j, "num_relations", s.num_relations);
  take(j, "num_intents", s.num_intents);
  take(j, "interactions_per_user", s.interactions_per_user);
  take(j, "attributes_per_item", s.attributes_per_item);
  take(j, "noise", s.noise);
  take(j, "secondary_weight", s.secondary_weight);
  take(j, "test_fraction", s.test_fraction);
  take(j, "seed", s.seed);
  take(j, "mixtures", s.mixtures);
  reject_unknown_keys(j, "synth spec");
  return s;
}

SynthSpec synth_spec_from_json_file(const std::string& path) {
  return synth_spec_from_json(read_file(path));
}

std::string synth_spec_to_json(const SynthSpec& s) {
  json j;
  j["num_users"] = s.num_users;
  j["num_items"] = s.num_items;
  j["num_entities"] = s.num_entities;
  j["num_relations"] = s.num_relations;
  j["num_intents"] = s.num_intents;
  j["interactions_per_user"] = s.interactions_per_user;
  j["attributes_per_item"] = s.attributes_per_item;
  j["noise"] = s.noise;
  j["secondary_weight"] = s.secondary_weight;
  j["test_fraction"] = s.test_fraction;
  j["seed"] = s.seed;
  if (!s.mixtures.empty()) j["mixtures"] = s.mixtures;
  return j.dump(2);
}

}  // namespace kgin
