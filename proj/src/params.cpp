// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "kgin/error.hpp"

namespace kgin {

ModelParams init_model_params(const ModelMeta& meta, std::size_t num_intents, std::uint64_t seed,
                              bool unit_frozen_relations) {
  if (num_intents == 0) throw ContractError("init_model_params: need at least one intent");
  if (meta.num_relations == 0) throw ContractError("init_model_params: need at least one relation");

  ModelParams p;
  p.meta = meta;
  p.user_embs.name = "user_embs";
  p.entity_embs.name = "entity_embs";
  p.relation_embs.name = "relation_embs";
  p.intent_cfg.num_intents = num_intents;
  p.intent_cfg.relation_logits.name = "relation_logits";

  p.user_embs.init_shape(meta.num_users, meta.dim);
  p.entity_embs.init_shape(meta.num_entities, meta.dim);
  p.relation_embs.init_shape(meta.num_relations, meta.dim);
  p.intent_cfg.relation_logits.init_shape(meta.num_relations, num_intents);

  std::mt19937_64 rng(seed);
  xavier_uniform(p.user_embs.values, rng);
  xavier_uniform(p.entity_embs.values, rng);
  xavier_uniform(p.relation_embs.values, rng);
  // Random (not zero) logits: with identical columns the intent channels would
  // receive identical gradients forever and never differentiate.
  xavier_uniform(p.intent_cfg.relation_logits.values, rng);

  if (unit_frozen_relations) {
    p.relation_embs.values.fill(1.0);
    p.relation_embs.frozen = true;
    p.intent_cfg.relation_logits.values.fill(0.0);
    p.intent_cfg.relation_logits.frozen = true;
  }
  return p;
}

void adam_step(std::vector<ParamTable*> tables, const AdamConfig& cfg) {
  for (ParamTable* t : tables) {
    if (t->frozen) continue;
    for (std::size_t i = 0; i < t->grads.size(); ++i)
      if (!std::isfinite(t->grads.a[i]))
        throw NumericError("adam_step: non-finite gradient in '" + t->name + "' at flat index " +
                           std::to_string(i));
    t->steps += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(t->steps));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(t->steps));
    for (std::size_t i = 0; i < t->values.size(); ++i) {
      const double g = t->grads.a[i];
      t->m.a[i] = cfg.beta1 * t->m.a[i] + (1.0 - cfg.beta1) * g;
      t->v.a[i] = cfg.beta2 * t->v.a[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = t->m.a[i] / bc1;
      const double vhat = t->v.a[i] / bc2;
      t->values.a[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

namespace {

constexpr char kMagic[8] = {'K', 'G', 'I', 'N', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_mat(std::ofstream& out, const Mat& m) {
  put(out, std::uint64_t(m.rows));
  put(out, std::uint64_t(m.cols));
  out.write(reinterpret_cast<const char*>(m.a.data()), std::streamsize(m.size() * sizeof(double)));
}

void put_table(std::ofstream& out, const ParamTable& t) {
  const std::uint32_t len = std::uint32_t(t.name.size());
  put(out, len);
  out.write(t.name.data(), len);
  put_mat(out, t.values);
  put_mat(out, t.m);
  put_mat(out, t.v);
  put(out, std::int64_t(t.steps));
  put(out, std::uint8_t(t.frozen ? 1 : 0));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("load_checkpoint: truncated file");
  return v;
}

Mat get_mat(std::ifstream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  Mat m = Mat::zeros(std::size_t(rows), std::size_t(cols));
  in.read(reinterpret_cast<char*>(m.a.data()), std::streamsize(m.size() * sizeof(double)));
  if (!in) throw ParseError("load_checkpoint: truncated file");
  return m;
}

ParamTable get_table(std::ifstream& in) {
  ParamTable t;
  const auto len = get<std::uint32_t>(in);
  t.name.resize(len);
  in.read(t.name.data(), len);
  if (!in) throw ParseError("load_checkpoint: truncated file");
  t.values = get_mat(in);
  t.m = get_mat(in);
  t.v = get_mat(in);
  t.steps = get<std::int64_t>(in);
  t.frozen = get<std::uint8_t>(in) != 0;
  t.grads = Mat::zeros(t.values.rows, t.values.cols);
  return t;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_checkpoint: cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, std::uint64_t(params.meta.num_users));
  put(out, std::uint64_t(params.meta.num_items));
  put(out, std::uint64_t(params.meta.num_entities));
  put(out, std::uint64_t(params.meta.num_relations));
  put(out, std::uint64_t(params.meta.dim));
  put(out, std::uint64_t(params.meta.layers));
  put(out, std::uint8_t(params.meta.normalize_by_pairs ? 1 : 0));
  put(out, std::uint64_t(params.intent_cfg.num_intents));
  for (const ParamTable* t : params.tables()) put_table(out, *t);
  if (!out) throw Error("save_checkpoint: write failed for '" + path + "'");
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("load_checkpoint: bad magic bytes in '" + path + "'");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw ParseError("load_checkpoint: unsupported version " + std::to_string(version));

  ModelParams p;
  p.meta.num_users = std::size_t(get<std::uint64_t>(in));
  p.meta.num_items = std::size_t(get<std::uint64_t>(in));
  p.meta.num_entities = std::size_t(get<std::uint64_t>(in));
  p.meta.num_relations = std::size_t(get<std::uint64_t>(in));
  p.meta.dim = std::size_t(get<std::uint64_t>(in));
  p.meta.layers = std::size_t(get<std::uint64_t>(in));
  p.meta.normalize_by_pairs = get<std::uint8_t>(in) != 0;
  p.intent_cfg.num_intents = std::size_t(get<std::uint64_t>(in));
  p.user_embs = get_table(in);
  p.entity_embs = get_table(in);
  p.relation_embs = get_table(in);
  p.intent_cfg.relation_logits = get_table(in);
  return p;
}

}  // namespace kgin
