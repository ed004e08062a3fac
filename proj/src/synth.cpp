// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kgin/error.hpp"
#include "kgin/train.hpp"

namespace kgin {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_weighted(const std::vector<double>& w, double total, std::mt19937_64& rng) {
  const double x = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (x < acc) return i;
  }
  // Fall to the last positive weight on rounding spill.
  for (std::size_t i = w.size(); i > 0; --i) {
    if (w[i - 1] > 0.0) return i - 1;
  }
  throw ContractError("pick_weighted: all weights zero");
}

std::vector<std::vector<double>> normalized_mixtures(const SynthSpec& spec) {
  std::vector<std::vector<double>> mix;
  if (!spec.mixtures.empty()) {
    if (spec.mixtures.size() != spec.num_intents)
      throw DataError("synth: mixtures must have num_intents rows");
    mix = spec.mixtures;
    for (auto& row : mix) {
      if (row.size() != spec.num_relations)
        throw DataError("synth: each mixture row must have num_relations entries");
      double sum = 0.0;
      for (double v : row) {
        if (v < 0.0 || !std::isfinite(v)) throw DataError("synth: mixture weights must be finite and >= 0");
        sum += v;
      }
      if (sum <= 0.0) throw DataError("synth: each mixture row needs positive mass");
      for (double& v : row) v /= sum;
    }
    return mix;
  }
  // Default: each relation belongs to one theme's block; in-block relations
  // dominate the row, so themes are separable through the knowledge graph.
  mix.assign(spec.num_intents, std::vector<double>(spec.num_relations, 0.0));
  for (std::size_t p = 0; p < spec.num_intents; ++p) {
    double sum = 0.0;
    for (std::size_t r = 0; r < spec.num_relations; ++r) {
      const std::size_t owner = r * spec.num_intents / spec.num_relations;
      mix[p][r] = 0.5 + (owner == p ? 8.0 : 0.0);
      sum += mix[p][r];
    }
    for (double& v : mix[p]) v /= sum;
  }
  return mix;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  if (spec.num_users == 0 || spec.num_items == 0) throw DataError("synth: need users and items");
  if (spec.num_entities < spec.num_items)
    throw DataError("synth: num_entities must be >= num_items (items are an entity prefix)");
  if (spec.num_relations == 0 || spec.num_intents == 0)
    throw DataError("synth: need at least one relation and one intent");
  if (spec.interactions_per_user == 0 || spec.interactions_per_user > spec.num_items)
    throw DataError("synth: interactions_per_user must be in [1, num_items]");
  if (spec.noise < 0.0 || !std::isfinite(spec.noise))
    throw DataError("synth: noise must be finite and >= 0");
  if (spec.secondary_weight < 0.0 || !std::isfinite(spec.secondary_weight))
    throw DataError("synth: secondary_weight must be finite and >= 0");
  if (spec.test_fraction < 0.0 || spec.test_fraction >= 1.0)
    throw DataError("synth: test_fraction must be in [0, 1)");
  const std::size_t attr_pool = spec.num_entities - spec.num_items;
  if (spec.attributes_per_item > 0 && attr_pool == 0)
    throw DataError("synth: attributes_per_item > 0 needs attribute entities beyond the items");
  if (spec.attributes_per_item > spec.num_relations * attr_pool)
    throw DataError("synth: not enough distinct (relation, attribute) pairs per item");
  if (spec.noise == 0.0) {
    // Zero-noise users can only pick from the themes they carry.
    std::vector<std::size_t> theme_count(spec.num_intents, 0);
    for (std::size_t i = 0; i < spec.num_items; ++i) ++theme_count[i % spec.num_intents];
    for (std::size_t u = 0; u < spec.num_users; ++u) {
      const std::size_t z = u % spec.num_intents;
      std::size_t reachable = theme_count[z];
      if (spec.secondary_weight > 0.0 && spec.num_intents >= 2) {
        const std::size_t s =
            (z + 1 + (u / spec.num_intents) % (spec.num_intents - 1)) % spec.num_intents;
        reachable += theme_count[s];
      }
      if (reachable < spec.interactions_per_user)
        throw DataError("synth: noise=0 but theme " + std::to_string(z) +
                        " has fewer items than interactions_per_user");
    }
  }

  std::mt19937_64 rng(spec.seed);
  SynthData out;
  out.truth.mixtures = normalized_mixtures(spec);

  out.truth.item_theme.resize(spec.num_items);
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    out.truth.item_theme[i] = static_cast<std::int32_t>(i % spec.num_intents);
  }
  out.truth.user_intent.resize(spec.num_users);
  out.truth.user_secondary.resize(spec.num_users);
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const std::size_t z = u % spec.num_intents;
    out.truth.user_intent[u] = static_cast<std::int32_t>(z);
    // Deterministic secondary theme: same-primary users cycle through the
    // other themes, so personalized blends differ even within a group.
    std::size_t s = z;
    if (spec.num_intents >= 2) {
      s = (z + 1 + (u / spec.num_intents) % (spec.num_intents - 1)) % spec.num_intents;
    }
    out.truth.user_secondary[u] = static_cast<std::int32_t>(s);
  }

  // Attribute triples: relations follow the item theme's mixture.
  out.kg.num_entities = spec.num_entities;
  out.kg.num_relations = spec.num_relations;
  out.kg.num_canonical_relations = spec.num_relations;
  out.kg.inverses_applied = false;
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    const auto& mix = out.truth.mixtures[static_cast<std::size_t>(out.truth.item_theme[i])];
    std::set<std::pair<std::int32_t, std::int32_t>> chosen;
    std::size_t guard = 0;
    while (chosen.size() < spec.attributes_per_item) {
      if (++guard > 1000 * (spec.attributes_per_item + 1))
        throw DataError("synth: could not draw distinct attributes for item " + std::to_string(i));
      const auto rel = static_cast<std::int32_t>(pick_weighted(mix, 1.0, rng));
      const auto tail =
          static_cast<std::int32_t>(spec.num_items + bounded_uniform(rng, attr_pool));
      chosen.insert({rel, tail});
    }
    for (const auto& [rel, tail] : chosen) {
      out.kg.triples.push_back({static_cast<std::int32_t>(i), rel, tail});
    }
  }
  std::sort(out.kg.triples.begin(), out.kg.triples.end());
  out.kg.triples.erase(std::unique(out.kg.triples.begin(), out.kg.triples.end()),
                       out.kg.triples.end());

  // Interactions: weighted sampling without replacement. Primary-theme items
  // carry weight 1, the user's persistent secondary theme `secondary_weight`
  // (default 0, i.e. off), everything else `noise`.
  out.train.num_users = out.test.num_users = spec.num_users;
  out.train.num_items = out.test.num_items = spec.num_items;
  out.train.positives.resize(spec.num_users);
  out.test.positives.resize(spec.num_users);
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const std::int32_t z = out.truth.user_intent[u];
    const std::int32_t s = out.truth.user_secondary[u];
    std::vector<double> w(spec.num_items);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.num_items; ++i) {
      if (out.truth.item_theme[i] == z) {
        w[i] = 1.0;
      } else if (out.truth.item_theme[i] == s) {
        w[i] = std::max(spec.secondary_weight, spec.noise);
      } else {
        w[i] = spec.noise;
      }
      total += w[i];
    }
    std::vector<std::int32_t> picked;
    picked.reserve(spec.interactions_per_user);
    for (std::size_t d = 0; d < spec.interactions_per_user; ++d) {
      const std::size_t idx = pick_weighted(w, total, rng);
      picked.push_back(static_cast<std::int32_t>(idx));
      total -= w[idx];
      w[idx] = 0.0;
    }
    deterministic_shuffle(picked, rng);
    const auto n_test =
        static_cast<std::size_t>(std::floor(spec.test_fraction * static_cast<double>(picked.size())));
    out.test.positives[u].assign(picked.begin(), picked.begin() + n_test);
    out.train.positives[u].assign(picked.begin() + n_test, picked.end());
    std::sort(out.test.positives[u].begin(), out.test.positives[u].end());
    std::sort(out.train.positives[u].begin(), out.train.positives[u].end());
  }
  return out;
}

double dcor_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractError("dcor_oracle: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw ContractError("dcor_oracle: need at least 2 samples");

  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      a[k][l] = std::fabs(x[k] - x[l]);
      b[k][l] = std::fabs(y[k] - y[l]);
    }
  }

  auto center = [n](std::vector<std::vector<double>>& m) {
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        row_mean[k] += m[k][l];
        col_mean[l] += m[k][l];
        grand += m[k][l];
      }
    }
    for (std::size_t k = 0; k < n; ++k) row_mean[k] /= static_cast<double>(n);
    for (std::size_t l = 0; l < n; ++l) col_mean[l] /= static_cast<double>(n);
    grand /= static_cast<double>(n * n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        m[k][l] = m[k][l] - row_mean[k] - col_mean[l] + grand;
      }
    }
  };
  center(a);
  center(b);

  double vxy = 0.0, vxx = 0.0, vyy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      vxy += a[k][l] * b[k][l];
      vxx += a[k][l] * a[k][l];
      vyy += b[k][l] * b[k][l];
    }
  }
  const double nn = static_cast<double>(n * n);
  vxy /= nn;
  vxx /= nn;
  vyy /= nn;

  const double dvx = std::sqrt(std::max(vxx, 0.0));
  const double dvy = std::sqrt(std::max(vyy, 0.0));
  if (dvx * dvy == 0.0) return 0.0;
  double r = std::sqrt(std::max(vxy, 0.0)) / std::sqrt(dvx * dvy);
  if (r < 0.0) r = 0.0;
  if (r > 1.0) r = 1.0;
  return r;
}

FdReport fd_gradient_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& grad_fn,
                           const std::vector<ParamTable*>& tables, double step) {
  if (step <= 0.0) throw ContractError("fd_gradient_check: step must be > 0");

  for (ParamTable* t : tables) t->grads.fill(0.0);
  grad_fn();

  std::vector<Mat> analytic;
  analytic.reserve(tables.size());
  double ginf = 0.0;
  for (ParamTable* t : tables) {
    analytic.push_back(t->grads);
    if (t->frozen) continue;
    for (double v : t->grads.a) ginf = std::max(ginf, std::fabs(v));
  }
  const double floor = 1e-4 * std::max(1.0, ginf);

  FdReport report;
  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    ParamTable* t = tables[ti];
    if (t->frozen) continue;
    for (std::size_t r = 0; r < t->values.rows; ++r) {
      for (std::size_t c = 0; c < t->values.cols; ++c) {
        const double old = t->values(r, c);
        t->values(r, c) = old + step;
        const double up = loss_fn();
        t->values(r, c) = old - step;
        const double down = loss_fn();
        t->values(r, c) = old;
        const double fd = (up - down) / (2.0 * step);
        const double g = analytic[ti](r, c);
        const double rel = std::fabs(g - fd) / std::max({std::fabs(g), std::fabs(fd), floor});
        ++report.entries_checked;
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_location =
              t->name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
          report.worst_analytic = g;
          report.worst_numeric = fd;
        }
      }
    }
  }
  return report;
}

}  // namespace kgin
