// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kgin/params.hpp"

namespace kgin {

enum class Variant { full, no_intents, no_relations_no_intents, mf };
enum class IndependenceKind { mutual_information, distance_correlation };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
std::string to_string(IndependenceKind k);
IndependenceKind parse_independence(const std::string& s);

struct TrainConfig {
  std::size_t dim = 64;
  std::size_t layers = 3;
  std::size_t num_intents = 4;
  std::size_t batch_size = 1024;
  std::size_t epochs = 100;
  double lr = 1e-4;
  double lambda1 = 1e-5;  // independence weight
  double lambda2 = 1e-5;  // L2 weight
  double tau = 1.0;       // temperature for the contrastive regularizer
  IndependenceKind independence = IndependenceKind::mutual_information;
  Variant variant = Variant::full;
  std::uint64_t seed = 2021;
  std::size_t eval_every = 5;  // epochs between evaluations; 0 = never
  std::size_t patience = 10;   // evaluations without recall improvement
  std::size_t k = 20;
  bool normalize_by_pairs = false;
  bool l2_full = false;  // regularize full tables instead of batch rows
  bool deterministic = true;

  AdamConfig adam() const { return {lr, 0.9, 0.999, 1e-8}; }
};

TrainConfig train_config_from_json(const std::string& text);
TrainConfig train_config_from_json_file(const std::string& path);
std::string train_config_to_json(const TrainConfig& cfg);

// Stable content hash of the canonical JSON form (FNV-1a 64, hex).
std::string config_fingerprint(const TrainConfig& cfg);

// Synthetic data recipe with planted per-user intents: items carry attribute
// triples whose relations follow their theme's mixture, and users mostly pick
// items matching their planted intent.
struct SynthSpec {
  std::size_t num_users = 200;
  std::size_t num_items = 100;
  std::size_t num_entities = 150;
  std::size_t num_relations = 6;  // canonical
  std::size_t num_intents = 3;    // planted
  std::size_t interactions_per_user = 15;
  std::size_t attributes_per_item = 3;
  double noise = 0.05;          // off-theme pick weight relative to 1.0
  // Weight for a persistent per-user secondary theme (0 = single-theme
  // users). Secondary themes cycle deterministically within a primary group,
  // so users carry individual theme blends the holdout split preserves.
  double secondary_weight = 0.0;
  double test_fraction = 0.2;   // per-user holdout share
  std::uint64_t seed = 7;
  // Optional (num_intents x num_relations) relation mixtures; a concentrated
  // block-diagonal default is derived when empty.
  std::vector<std::vector<double>> mixtures;
};

SynthSpec synth_spec_from_json(const std::string& text);
SynthSpec synth_spec_from_json_file(const std::string& path);
std::string synth_spec_to_json(const SynthSpec& spec);

}  // namespace kgin
