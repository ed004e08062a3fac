// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
//
// kgin: knowledge-graph-aware recommender with intent factorization.
// Subcommands: train, eval, explain, gen-synth, verify, verify-paths,
// measure-dcor, preprocess.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgin/aggregate.hpp"
#include "kgin/config.hpp"
#include "kgin/error.hpp"
#include "kgin/eval.hpp"
#include "kgin/explain.hpp"
#include "kgin/graph_index.hpp"
#include "kgin/independence.hpp"
#include "kgin/intent.hpp"
#include "kgin/interaction_set.hpp"
#include "kgin/params.hpp"
#include "kgin/synth.hpp"
#include "kgin/train.hpp"
#include "kgin/triple_set.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct DatasetPaths {
  std::string cf, kg, test;
};

// Explicit file flags win; a --data directory fills the gaps with its
// train.txt / kg.txt / test.txt.
DatasetPaths resolve_dataset(const std::string& data_dir, std::string cf, std::string kg,
                             std::string test) {
  if (!data_dir.empty()) {
    if (cf.empty()) cf = (fs::path(data_dir) / "train.txt").string();
    if (kg.empty()) kg = (fs::path(data_dir) / "kg.txt").string();
    if (test.empty()) {
      const fs::path t = fs::path(data_dir) / "test.txt";
      if (fs::exists(t)) test = t.string();
    }
  }
  if (cf.empty() || kg.empty())
    throw kgin::DataError("need --data <dir> or explicit --cf/--kg paths");
  return {cf, kg, test};
}

// Load train/test interaction files onto one id space, plus the KG with
// inverse relations applied and the entity space stretched over all items.
struct LoadedData {
  kgin::InteractionSet train;
  kgin::InteractionSet test;  // empty when no test path given
  kgin::TripleSet kg;
  kgin::GraphIndex graph;
};

LoadedData load_dataset(const DatasetPaths& paths) {
  LoadedData d;
  d.train = kgin::load_cf(paths.cf);
  print_warnings(d.train.warnings);
  if (!paths.test.empty()) {
    d.test = kgin::load_cf(paths.test, d.train.num_users, d.train.num_items);
    print_warnings(d.test.warnings);
    d.train.expand(d.test.num_users, d.test.num_items);
  }
  kgin::TripleSet canonical = kgin::load_kg(paths.kg);
  print_warnings(canonical.warnings);
  if (canonical.num_entities < d.train.num_items) {
    // Items without any triple are isolated entities, not an error.
    canonical.num_entities = d.train.num_items;
  }
  d.kg = kgin::add_inverse_relations(canonical);
  d.graph = kgin::build_index(d.train, d.kg);
  return d;
}

std::vector<std::string> load_name_map(const std::string& path) {
  std::vector<std::string> names;
  if (path.empty()) return names;
  std::ifstream in(path);
  if (!in) throw kgin::DataError("cannot open name map: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    long id = -1;
    if (!(ls >> id) || id < 0) continue;
    std::string name;
    std::getline(ls, name);
    const std::size_t start = name.find_first_not_of(" \t");
    name = start == std::string::npos ? "" : name.substr(start);
    if (static_cast<std::size_t>(id) >= names.size()) names.resize(id + 1);
    names[static_cast<std::size_t>(id)] = name;
  }
  return names;
}

struct CheckLine {
  std::string name;
  bool pass = false;
  double millis = 0.0;
  std::string detail;
};

int report_checks(const std::vector<CheckLine>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.millis << " ms)";
    if (!c.detail.empty()) std::cout << " — " << c.detail;
    std::cout << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "all checks passed" : "CHECKS FAILED") << "\n";
  return all ? 0 : 1;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------- train ----

int cmd_train(const DatasetPaths& paths, const kgin::TrainConfig& cfg_in,
              const std::string& out_dir) {
  kgin::TrainConfig cfg = kgin::make_ablation(cfg_in, cfg_in.variant);
  LoadedData d = load_dataset(paths);

  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "train_log.jsonl");
  if (!log) throw kgin::DataError("cannot open train log for writing in " + out_dir);

  std::cerr << "training: " << d.train.num_users << " users, " << d.train.num_items
            << " items, " << d.graph.num_entities << " entities, "
            << d.graph.num_relations << " relations (inverse-doubled), "
            << d.train.total_interactions() << " interactions\n";

  const kgin::FitResult result = kgin::fit(d.train, d.test, d.graph, cfg, &log);

  const fs::path ckpt = fs::path(out_dir) / "model.ckpt";
  const fs::path idx = fs::path(out_dir) / "graph.idx";
  kgin::save_checkpoint(result.params, ckpt.string());
  kgin::save_index(d.graph, idx.string());
  {
    std::ofstream cfg_out(fs::path(out_dir) / "config.json");
    cfg_out << kgin::train_config_to_json(cfg) << "\n";
  }

  json summary;
  summary["checkpoint"] = ckpt.string();
  summary["index"] = idx.string();
  summary["config_fingerprint"] = kgin::config_fingerprint(cfg);
  summary["epochs_run"] = result.log.size();
  summary["aborted"] = result.aborted;
  if (result.aborted) summary["abort_reason"] = result.abort_reason;
  summary["early_stopped"] = result.early_stopped;
  if (result.best_epoch > 0) {
    summary["best_epoch"] = result.best_epoch;
    summary["best_recall"] = result.best_recall;
  }

  if (d.test.total_interactions() > 0) {
    const kgin::ForwardOpts opts{cfg.layers, cfg.normalize_by_pairs};
    const kgin::FinalReps reps = kgin::compute_final_reps(result.params, d.graph, opts);
    const kgin::EvalReport report =
        kgin::evaluate(reps, d.train, d.test, cfg.k, kgin::config_fingerprint(cfg));
    summary["recall"] = report.recall;
    summary["ndcg"] = report.ndcg;
    summary["users_evaluated"] = report.users_evaluated;
    summary["users_skipped"] = report.users_skipped;
    std::ofstream eval_out(fs::path(out_dir) / "eval.json");
    eval_out << kgin::eval_report_to_json(report) << "\n";
  }

  std::cout << summary.dump(2) << "\n";
  return result.aborted ? 1 : 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& ckpt, const std::string& index_path,
             const std::string& data_dir, const std::string& cf, const std::string& kg,
             const std::string& test_path, std::size_t k, const std::string& variant,
             unsigned threads, const std::string& out_file) {
  kgin::ModelParams params = kgin::load_checkpoint(ckpt);

  kgin::GraphIndex g;
  kgin::InteractionSet mask, test;
  if (!index_path.empty()) {
    g = kgin::load_index(index_path);
    const DatasetPaths paths = resolve_dataset(data_dir, cf, "-", test_path);
    mask = kgin::load_cf(paths.cf, g.num_users, g.num_items);
    print_warnings(mask.warnings);
    if (paths.test.empty()) throw kgin::DataError("eval: need --test (or --data with test.txt)");
    test = kgin::load_cf(paths.test, g.num_users, g.num_items);
    print_warnings(test.warnings);
  } else {
    const DatasetPaths paths = resolve_dataset(data_dir, cf, kg, test_path);
    if (paths.test.empty()) throw kgin::DataError("eval: need --test (or --data with test.txt)");
    LoadedData d = load_dataset(paths);
    g = std::move(d.graph);
    mask = std::move(d.train);
    test = std::move(d.test);
  }

  params = kgin::apply_scoring_variant(params, kgin::parse_variant(variant));
  const kgin::ForwardOpts opts{params.meta.layers, params.meta.normalize_by_pairs};
  const kgin::FinalReps reps = kgin::compute_final_reps(params, g, opts);
  const kgin::EvalReport report = kgin::evaluate(reps, mask, test, k, "", threads);

  const std::string text = kgin::eval_report_to_json(report);
  std::cout << text << "\n";
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    out << text << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- explain ----

int cmd_explain(const std::string& ckpt, const std::string& index_path,
                const std::string& data_dir, std::int32_t user, std::int32_t item,
                bool as_json, const std::string& names_path, std::size_t top) {
  const kgin::ModelParams params = kgin::load_checkpoint(ckpt);
  kgin::GraphIndex g;
  if (!index_path.empty()) {
    g = kgin::load_index(index_path);
  } else {
    const DatasetPaths paths = resolve_dataset(data_dir, "", "", "");
    g = load_dataset(paths).graph;
  }
  const std::vector<std::string> names = load_name_map(names_path);
  const std::vector<std::string>* names_ptr = names.empty() ? nullptr : &names;
  const kgin::Explanation e = kgin::explain_interaction(params, g, user, item);
  std::cout << (as_json ? kgin::explanation_to_json(e, names_ptr, top) + "\n"
                        : kgin::explanation_to_text(e, names_ptr, top));
  return 0;
}

// ------------------------------------------------------------ gen-synth ----

int cmd_gen_synth(const std::string& spec_path, const std::string& out_dir) {
  kgin::SynthSpec spec;
  if (!spec_path.empty()) spec = kgin::synth_spec_from_json_file(spec_path);
  const kgin::SynthData data = kgin::generate(spec);

  fs::create_directories(out_dir);
  kgin::save_cf(data.train, (fs::path(out_dir) / "train.txt").string());
  kgin::save_cf(data.test, (fs::path(out_dir) / "test.txt").string());
  kgin::save_kg(data.kg, (fs::path(out_dir) / "kg.txt").string());
  {
    std::ofstream spec_out(fs::path(out_dir) / "spec.json");
    spec_out << kgin::synth_spec_to_json(spec) << "\n";
  }
  {
    json truth;
    truth["user_intent"] = data.truth.user_intent;
    truth["user_secondary"] = data.truth.user_secondary;
    truth["item_theme"] = data.truth.item_theme;
    truth["mixtures"] = data.truth.mixtures;
    std::ofstream truth_out(fs::path(out_dir) / "truth.json");
    truth_out << truth.dump(2) << "\n";
  }

  json stats;
  stats["users"] = data.train.num_users;
  stats["items"] = data.train.num_items;
  stats["entities"] = data.kg.num_entities;
  stats["relations"] = data.kg.num_relations;
  stats["train_interactions"] = data.train.total_interactions();
  stats["test_interactions"] = data.test.total_interactions();
  stats["triples"] = data.kg.triples.size();
  std::cout << stats.dump(2) << "\n";
  return 0;
}

// ----------------------------------------------------------- preprocess ----

int cmd_preprocess(const std::string& cf_path, const std::string& kg_path,
                   const std::string& out_dir, std::size_t min_degree) {
  kgin::InteractionSet raw = kgin::load_cf(cf_path);
  print_warnings(raw.warnings);
  const kgin::CoreFilterResult filtered = kgin::core_filter(raw, min_degree);

  kgin::TripleSet kg = kgin::load_kg(kg_path);
  print_warnings(kg.warnings);

  // Remap item heads/tails through the filter's item map; non-item entities
  // that survive in some triple are compacted after the new item prefix, in
  // ascending old-id order. Triples touching a dropped item are dropped.
  const std::size_t new_items = filtered.cf.num_items;
  std::vector<std::int32_t> entity_map(kg.num_entities, -1);
  for (std::size_t old = 0; old < kg.num_entities; ++old) {
    if (old < filtered.item_map.size()) entity_map[old] = filtered.item_map[old];
  }
  auto alive = [&](std::int32_t id) {
    return id >= 0 && static_cast<std::size_t>(id) < kg.num_entities &&
           (static_cast<std::size_t>(id) >= filtered.item_map.size() ||
            filtered.item_map[static_cast<std::size_t>(id)] >= 0);
  };
  std::vector<bool> used(kg.num_entities, false);
  for (const auto& t : kg.triples) {
    if (alive(t[0]) && alive(t[2])) {
      used[static_cast<std::size_t>(t[0])] = true;
      used[static_cast<std::size_t>(t[2])] = true;
    }
  }
  std::int32_t next_id = static_cast<std::int32_t>(new_items);
  for (std::size_t old = 0; old < kg.num_entities; ++old) {
    const bool is_old_item = old < filtered.item_map.size();
    if (!is_old_item && used[old]) entity_map[old] = next_id++;
  }
  kgin::TripleSet out_kg;
  out_kg.num_entities = static_cast<std::size_t>(next_id);
  out_kg.num_relations = kg.num_relations;
  out_kg.num_canonical_relations = kg.num_canonical_relations;
  for (const auto& t : kg.triples) {
    if (!alive(t[0]) || !alive(t[2])) continue;
    out_kg.triples.push_back({entity_map[static_cast<std::size_t>(t[0])], t[1],
                              entity_map[static_cast<std::size_t>(t[2])]});
  }
  std::sort(out_kg.triples.begin(), out_kg.triples.end());
  out_kg.triples.erase(std::unique(out_kg.triples.begin(), out_kg.triples.end()),
                       out_kg.triples.end());

  fs::create_directories(out_dir);
  kgin::save_cf(filtered.cf, (fs::path(out_dir) / "train.txt").string());
  kgin::save_kg(out_kg, (fs::path(out_dir) / "kg.txt").string());

  json stats;
  stats["users"] = filtered.cf.num_users;
  stats["items"] = filtered.cf.num_items;
  stats["interactions"] = filtered.cf.total_interactions();
  stats["entities"] = out_kg.num_entities;
  stats["relations"] = out_kg.num_relations;
  stats["triples"] = out_kg.triples.size();
  stats["filter_rounds"] = filtered.rounds;
  std::cout << stats.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------- measure-dcor ----

int cmd_measure_dcor(const std::string& ckpt) {
  const kgin::ModelParams params = kgin::load_checkpoint(ckpt);
  const kgin::IntentTable intents =
      kgin::compute_intents(params.intent_cfg, params.relation_embs);
  json out;
  out["num_intents"] = intents.embeddings.rows;
  out["mean_pairwise_dcor"] = kgin::mean_pairwise_dcor(intents.embeddings);
  out["pairs"] = json::array();
  for (std::size_t p = 0; p < intents.embeddings.rows; ++p) {
    for (std::size_t q = p + 1; q < intents.embeddings.rows; ++q) {
      const kgin::DcorResult r = kgin::dcor_rows(intents.embeddings, p, q);
      out["pairs"].push_back(
          {{"p", p}, {"q", q}, {"dcor", r.value}, {"degenerate", r.degenerate}});
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------- verify-paths ----

int cmd_verify_paths(const DatasetPaths& paths, std::size_t max_layers,
                     std::size_t samples, std::uint64_t seed) {
  LoadedData d = load_dataset(paths);
  kgin::ModelMeta meta;
  meta.num_users = d.graph.num_users;
  meta.num_items = d.graph.num_items;
  meta.num_entities = d.graph.num_entities;
  meta.num_relations = d.graph.num_relations;
  meta.dim = 8;
  meta.layers = max_layers;
  const kgin::ModelParams params = kgin::init_model_params(meta, 2, seed);
  const kgin::LayerStates states = kgin::propagate(params, d.graph, {max_layers, false});

  std::mt19937_64 rng(seed);
  std::vector<CheckLine> checks;
  for (std::size_t l = 1; l <= max_layers; ++l) {
    const double t0 = now_ms();
    double max_diff = 0.0;
    std::size_t checked = 0, exploded = 0;
    for (std::size_t attempt = 0; attempt < 20 * samples && checked < samples; ++attempt) {
      const auto entity =
          static_cast<std::int32_t>(kgin::bounded_uniform(rng, d.graph.num_entities));
      kgin::Mat oracle;
      try {
        oracle = kgin::enumerate_paths_oracle(d.graph, params, entity, l);
      } catch (const kgin::ContractError&) {
        ++exploded;  // too many paths from this entity; try another
        continue;
      }
      ++checked;
      for (std::size_t c = 0; c < meta.dim; ++c) {
        const double a = oracle(0, c);
        const double b = states.entity_reps[l](static_cast<std::size_t>(entity), c);
        max_diff = std::max(max_diff, std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1.0}));
      }
    }
    CheckLine line;
    line.name = "path equivalence, layer " + std::to_string(l) + " (" +
                std::to_string(checked) + " entities)";
    line.pass = checked > 0 && max_diff < 1e-10;
    line.millis = now_ms() - t0;
    line.detail = "max rel diff = " + std::to_string(max_diff) +
                  (exploded > 0 ? ", skipped " + std::to_string(exploded) + " dense entities" : "");
    checks.push_back(line);
  }
  return report_checks(checks);
}

// --------------------------------------------------------------- verify ----

int cmd_verify(std::uint64_t seed, const std::string& data_dir) {
  std::vector<CheckLine> checks;
  std::mt19937_64 rng(seed);

  {  // distance correlation against the nested-loop oracle
    const double t0 = now_ms();
    double max_diff = 0.0;
    double self_err = 0.0;
    bool in_range = true;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 16;
      std::vector<double> x(d), y(d);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = std::ldexp(static_cast<double>(rng() >> 11), -53) * 4.0 - 2.0;
        y[i] = std::ldexp(static_cast<double>(rng() >> 11), -53) * 4.0 - 2.0;
      }
      const kgin::DcorResult r = kgin::dcor(x.data(), y.data(), d);
      max_diff = std::max(max_diff, std::fabs(r.value - kgin::dcor_oracle(x, y)));
      in_range = in_range && r.value >= 0.0 && r.value <= 1.0;
      const kgin::DcorResult self = kgin::dcor(x.data(), x.data(), d);
      self_err = std::max(self_err, std::fabs(self.value - 1.0));
    }
    CheckLine line;
    line.name = "distance correlation vs oracle (50 pairs)";
    line.pass = max_diff < 1e-10 && self_err < 1e-12 && in_range;
    line.millis = now_ms() - t0;
    line.detail = "max |diff| = " + std::to_string(max_diff) +
                  ", self err = " + std::to_string(self_err);
    checks.push_back(line);
  }

  {  // gradients vs central differences, both regularizers
    for (const auto kind : {kgin::IndependenceKind::mutual_information,
                            kgin::IndependenceKind::distance_correlation}) {
      const double t0 = now_ms();
      kgin::SynthSpec spec;
      spec.num_users = 12;
      spec.num_items = 10;
      spec.num_entities = 18;
      spec.num_relations = 4;
      spec.num_intents = 2;
      spec.interactions_per_user = 4;
      spec.attributes_per_item = 2;
      spec.test_fraction = 0.0;
      spec.seed = seed;
      const kgin::SynthData data = kgin::generate(spec);
      const kgin::TripleSet doubled = kgin::add_inverse_relations(data.kg);
      const kgin::GraphIndex g = kgin::build_index(data.train, doubled);

      kgin::TrainConfig cfg;
      cfg.dim = 5;
      cfg.layers = 2;
      cfg.num_intents = 3;
      cfg.lambda1 = 0.05;
      cfg.lambda2 = 0.01;
      cfg.independence = kind;
      cfg.seed = seed;
      kgin::ModelMeta meta;
      meta.num_users = g.num_users;
      meta.num_items = g.num_items;
      meta.num_entities = g.num_entities;
      meta.num_relations = g.num_relations;
      meta.dim = cfg.dim;
      meta.layers = cfg.layers;
      kgin::ModelParams params = kgin::init_model_params(meta, cfg.num_intents, cfg.seed);

      kgin::Batch batch;
      std::mt19937_64 neg_rng(seed + 1);
      for (std::size_t u = 0; u < g.num_users; ++u) {
        for (std::int32_t i : data.train.positives[u]) {
          batch.users.push_back(static_cast<std::int32_t>(u));
          batch.pos.push_back(i);
          batch.neg.push_back(
              kgin::sample_negatives(static_cast<std::int32_t>(u), data.train, neg_rng));
        }
      }

      auto loss_fn = [&]() { return kgin::total_loss(batch, params, g, cfg); };
      auto grad_fn = [&]() {
        kgin::ad::Tape t;
        const kgin::ParamVars pv = kgin::lease_params(t, params);
        const kgin::ForwardVars fv =
            kgin::build_forward(t, pv, g, {cfg.layers, cfg.normalize_by_pairs});
        const kgin::LossVars lv = kgin::build_total_loss(t, fv, batch, cfg, true);
        t.backward(lv.total);
      };
      const kgin::FdReport report =
          kgin::fd_gradient_check(loss_fn, grad_fn, params.tables(), 1e-5);

      CheckLine line;
      line.name = "gradient check, " + kgin::to_string(kind);
      line.pass = report.max_rel_err < 1e-4;
      line.millis = now_ms() - t0;
      line.detail = "max rel err = " + std::to_string(report.max_rel_err) + " at " +
                    report.worst_location;
      checks.push_back(line);
    }
  }

  {  // layer recursion vs exhaustive path enumeration
    const double t0 = now_ms();
    double max_diff = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      kgin::SynthSpec spec;
      spec.num_users = 8;
      spec.num_items = 12;
      spec.num_entities = 20;
      spec.num_relations = 3;
      spec.num_intents = 2;
      spec.interactions_per_user = 3;
      spec.attributes_per_item = 2;
      spec.test_fraction = 0.0;
      spec.seed = seed + static_cast<std::uint64_t>(trial);
      const kgin::SynthData data = kgin::generate(spec);
      const kgin::TripleSet doubled = kgin::add_inverse_relations(data.kg);
      const kgin::GraphIndex g = kgin::build_index(data.train, doubled);
      kgin::ModelMeta meta;
      meta.num_users = g.num_users;
      meta.num_items = g.num_items;
      meta.num_entities = g.num_entities;
      meta.num_relations = g.num_relations;
      meta.dim = 6;
      meta.layers = 3;
      const kgin::ModelParams params = kgin::init_model_params(meta, 2, spec.seed);
      const kgin::LayerStates states = kgin::propagate(params, g, {3, false});
      for (std::size_t l = 1; l <= 3; ++l) {
        for (std::int32_t e = 0; e < static_cast<std::int32_t>(g.num_entities); ++e) {
          const kgin::Mat oracle = kgin::enumerate_paths_oracle(g, params, e, l);
          for (std::size_t c = 0; c < meta.dim; ++c) {
            max_diff = std::max(max_diff,
                                std::fabs(oracle(0, c) -
                                          states.entity_reps[l](static_cast<std::size_t>(e), c)));
          }
        }
      }
    }
    CheckLine line;
    line.name = "path enumeration vs layer recursion (5 graphs, layers 1-3)";
    line.pass = max_diff < 1e-10;
    line.millis = now_ms() - t0;
    line.detail = "max |diff| = " + std::to_string(max_diff);
    checks.push_back(line);
  }

  {  // ranking metrics hand case
    const double t0 = now_ms();
    // One relevant item at rank 1 of 2 relevant total: ndcg@2 = 1 / (1 + 1/log2 3).
    const std::vector<std::int32_t> ranking = {5, 9, 1};
    const std::vector<std::int32_t> pos = {5, 7};
    const double got = kgin::ndcg_at_k(ranking, pos, 2);
    const double want = 1.0 / (1.0 + 1.0 / std::log2(3.0));
    const double rec = kgin::recall_at_k(ranking, pos, 2);
    CheckLine line;
    line.name = "ranking metric hand case";
    line.pass = std::fabs(got - want) < 1e-10 && std::fabs(rec - 0.5) < 1e-15;
    line.millis = now_ms() - t0;
    line.detail = "ndcg = " + std::to_string(got);
    checks.push_back(line);
  }

  {  // training determinism
    const double t0 = now_ms();
    kgin::SynthData data;
    if (data_dir.empty()) {
      kgin::SynthSpec spec;
      spec.num_users = 20;
      spec.num_items = 15;
      spec.num_entities = 25;
      spec.num_relations = 4;
      spec.num_intents = 2;
      spec.interactions_per_user = 5;
      spec.attributes_per_item = 2;
      spec.seed = seed;
      data = kgin::generate(spec);
    }
    kgin::GraphIndex g;
    kgin::InteractionSet train, test;
    if (data_dir.empty()) {
      const kgin::TripleSet doubled = kgin::add_inverse_relations(data.kg);
      g = kgin::build_index(data.train, doubled);
      train = data.train;
      test = data.test;
    } else {
      LoadedData d = load_dataset(resolve_dataset(data_dir, "", "", ""));
      g = std::move(d.graph);
      train = std::move(d.train);
      test = std::move(d.test);
    }
    kgin::TrainConfig cfg;
    cfg.dim = 8;
    cfg.layers = 2;
    cfg.num_intents = 2;
    cfg.batch_size = 64;
    cfg.epochs = 2;
    cfg.lr = 1e-3;
    cfg.eval_every = 0;
    cfg.seed = seed;
    kgin::FitResult a = kgin::fit(train, test, g, cfg);
    kgin::FitResult b = kgin::fit(train, test, g, cfg);
    bool same = true;
    const auto ta = a.params.tables();
    const auto tb = b.params.tables();
    for (std::size_t i = 0; i < ta.size(); ++i) {
      same = same && kgin::bitwise_equal(ta[i]->values, tb[i]->values);
    }
    CheckLine line;
    line.name = "training determinism (2 identical runs)";
    line.pass = same;
    line.millis = now_ms() - t0;
    checks.push_back(line);
  }

  return report_checks(checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgin: intent-factored knowledge-graph recommender"};
  app.require_subcommand(1);

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  std::string tr_data, tr_cf, tr_kg, tr_test, tr_config, tr_out = "run";
  tr->add_option("--data", tr_data, "dataset directory (train.txt, kg.txt[, test.txt])");
  tr->add_option("--cf", tr_cf, "training interactions file");
  tr->add_option("--kg", tr_kg, "knowledge graph triples file");
  tr->add_option("--test", tr_test, "held-out interactions file");
  tr->add_option("--config", tr_config, "JSON training config");
  tr->add_option("--out", tr_out, "output directory");
  kgin::TrainConfig ov;
  std::string ov_variant, ov_independence;
  auto* o_dim = tr->add_option("--dim", ov.dim, "embedding width");
  auto* o_layers = tr->add_option("--layers", ov.layers, "message-passing depth");
  auto* o_intents = tr->add_option("--num-intents", ov.num_intents, "intent count");
  auto* o_batch = tr->add_option("--batch-size", ov.batch_size, "");
  auto* o_epochs = tr->add_option("--epochs", ov.epochs, "");
  auto* o_lr = tr->add_option("--lr", ov.lr, "");
  auto* o_l1 = tr->add_option("--lambda1", ov.lambda1, "independence weight");
  auto* o_l2 = tr->add_option("--lambda2", ov.lambda2, "L2 weight");
  auto* o_tau = tr->add_option("--tau", ov.tau, "");
  auto* o_ind = tr->add_option("--independence", ov_independence,
                               "mutual_information | distance_correlation");
  auto* o_var = tr->add_option("--variant", ov_variant,
                               "full | no_intents | no_relations_no_intents | mf");
  auto* o_seed = tr->add_option("--seed", ov.seed, "");
  auto* o_every = tr->add_option("--eval-every", ov.eval_every, "");
  auto* o_pat = tr->add_option("--patience", ov.patience, "");
  auto* o_k = tr->add_option("--k", ov.k, "");
  auto* o_np = tr->add_flag("--normalize-by-pairs", ov.normalize_by_pairs, "");
  auto* o_l2full = tr->add_flag("--l2-full", ov.l2_full, "regularize full tables");
  auto* o_det = tr->add_flag("--deterministic", ov.deterministic,
                             "single-threaded, bit-reproducible run (default)");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_ckpt, ev_idx, ev_data, ev_mask, ev_kg, ev_test, ev_variant = "full", ev_out;
  std::size_t ev_k = 20;
  unsigned ev_threads = 1;
  ev->add_option("--ckpt,--checkpoint", ev_ckpt)->required();
  ev->add_option("--data", ev_data, "dataset directory");
  ev->add_option("--index", ev_idx, "prebuilt graph index (skips --kg)");
  ev->add_option("--train-cf", ev_mask, "interactions masked out of the ranking");
  ev->add_option("--kg", ev_kg, "knowledge graph triples file");
  ev->add_option("--test", ev_test);
  ev->add_option("--k", ev_k);
  ev->add_option("--variant", ev_variant, "scoring-time ablation");
  ev->add_option("--threads", ev_threads);
  ev->add_option("--out", ev_out, "also write the report here");

  // explain
  auto* ex = app.add_subcommand("explain", "explain a user-item score");
  std::string ex_ckpt, ex_idx, ex_data, ex_names;
  std::int32_t ex_user = 0, ex_item = 0;
  std::size_t ex_top = 0;
  bool ex_json = false;
  ex->add_option("--ckpt,--checkpoint", ex_ckpt)->required();
  ex->add_option("--index", ex_idx, "prebuilt graph index");
  ex->add_option("--data", ex_data, "dataset directory");
  ex->add_option("--user", ex_user)->required();
  ex->add_option("--item", ex_item)->required();
  ex->add_option("--names", ex_names, "relation id -> name map file");
  ex->add_option("--top", ex_top, "truncate the relation profile");
  ex->add_flag("--json", ex_json, "JSON output");

  // gen-synth
  auto* gs = app.add_subcommand("gen-synth", "generate a planted synthetic dataset");
  std::string gs_spec, gs_out = "synth";
  gs->add_option("--spec", gs_spec, "JSON generator spec");
  gs->add_option("--out", gs_out, "output directory");

  // verify
  auto* vf = app.add_subcommand("verify", "run the built-in oracle checks");
  std::uint64_t vf_seed = 17;
  std::string vf_data;
  vf->add_option("--seed", vf_seed);
  vf->add_option("--data", vf_data, "dataset directory for the determinism check");

  // verify-paths
  auto* vp = app.add_subcommand("verify-paths",
                                "compare layer recursion against path enumeration");
  std::string vp_data, vp_cf, vp_kg;
  std::size_t vp_layers = 3, vp_samples = 10;
  std::uint64_t vp_seed = 17;
  vp->add_option("--data", vp_data, "dataset directory");
  vp->add_option("--cf", vp_cf);
  vp->add_option("--kg", vp_kg);
  vp->add_option("--layers", vp_layers);
  vp->add_option("--samples", vp_samples);
  vp->add_option("--seed", vp_seed);

  // measure-dcor
  auto* md = app.add_subcommand("measure-dcor", "intent distance correlations");
  std::string md_ckpt;
  md->add_option("--ckpt,--checkpoint", md_ckpt)->required();

  // preprocess
  auto* pp = app.add_subcommand("preprocess", "degree-filter and remap a dataset");
  std::string pp_cf, pp_kg, pp_out = "preprocessed";
  std::size_t pp_min = 10;
  pp->add_option("--cf", pp_cf)->required();
  pp->add_option("--kg", pp_kg)->required();
  pp->add_option("--out", pp_out);
  pp->add_option("--min-degree", pp_min);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tr) {
      kgin::TrainConfig cfg;
      if (!tr_config.empty()) cfg = kgin::train_config_from_json_file(tr_config);
      if (o_dim->count()) cfg.dim = ov.dim;
      if (o_layers->count()) cfg.layers = ov.layers;
      if (o_intents->count()) cfg.num_intents = ov.num_intents;
      if (o_batch->count()) cfg.batch_size = ov.batch_size;
      if (o_epochs->count()) cfg.epochs = ov.epochs;
      if (o_lr->count()) cfg.lr = ov.lr;
      if (o_l1->count()) cfg.lambda1 = ov.lambda1;
      if (o_l2->count()) cfg.lambda2 = ov.lambda2;
      if (o_tau->count()) cfg.tau = ov.tau;
      if (o_ind->count()) cfg.independence = kgin::parse_independence(ov_independence);
      if (o_var->count()) cfg.variant = kgin::parse_variant(ov_variant);
      if (o_seed->count()) cfg.seed = ov.seed;
      if (o_every->count()) cfg.eval_every = ov.eval_every;
      if (o_pat->count()) cfg.patience = ov.patience;
      if (o_k->count()) cfg.k = ov.k;
      if (o_np->count()) cfg.normalize_by_pairs = ov.normalize_by_pairs;
      if (o_l2full->count()) cfg.l2_full = ov.l2_full;
      if (o_det->count()) cfg.deterministic = ov.deterministic;
      return cmd_train(resolve_dataset(tr_data, tr_cf, tr_kg, tr_test), cfg, tr_out);
    }
    if (*ev)
      return cmd_eval(ev_ckpt, ev_idx, ev_data, ev_mask, ev_kg, ev_test, ev_k, ev_variant,
                      ev_threads, ev_out);
    if (*ex) return cmd_explain(ex_ckpt, ex_idx, ex_data, ex_user, ex_item, ex_json, ex_names, ex_top);
    if (*gs) return cmd_gen_synth(gs_spec, gs_out);
    if (*vf) return cmd_verify(vf_seed, vf_data);
    if (*vp) return cmd_verify_paths(resolve_dataset(vp_data, vp_cf, vp_kg, ""), vp_layers, vp_samples, vp_seed);
    if (*md) return cmd_measure_dcor(md_ckpt);
    if (*pp) return cmd_preprocess(pp_cf, pp_kg, pp_out, pp_min);
  } catch (const kgin::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
