// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the test suites: temp files, tiny fixture graphs, and a
// chi-square tail probability for the RNG uniformity tests.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kgin/graph_index.hpp"
#include "kgin/interaction_set.hpp"
#include "kgin/synth.hpp"
#include "kgin/triple_set.hpp"

namespace testsup {

// Directory unique to the calling test binary, wiped on first use per run.
inline std::filesystem::path tmp_dir(const std::string& suite) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("kgin_" + suite);
  static bool wiped = false;
  if (!wiped) {
    std::filesystem::remove_all(p);
    wiped = true;
  }
  std::filesystem::create_directories(p);
  return p;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return path.string();
}

// Regularized upper incomplete gamma Q(a, x): series for x < a + 1, continued
// fraction otherwise. Tail probability of a chi-square statistic `chi2` with
// `dof` degrees of freedom is Q(dof / 2, chi2 / 2).
inline double gammq(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {  // P(a,x) by series, return 1 - P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Q(a,x) by Lentz's continued fraction.
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi2_pvalue(const std::vector<std::size_t>& counts, double expected_each) {
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    const double diff = static_cast<double>(c) - expected_each;
    chi2 += diff * diff / expected_each;
  }
  return gammq(static_cast<double>(counts.size() - 1) / 2.0, chi2 / 2.0);
}

// Hand-sized fixture: 3 users, 4 items, 6 entities, 2 canonical relations.
//   u0: i0 i1   u1: i1 i2 i3   u2: i0
//   kg (canonical): (0,0,4) (1,0,4) (1,1,5) (2,0,5) (3,1,4)
struct TinyGraph {
  kgin::InteractionSet cf;
  kgin::TripleSet kg;  // inverse-doubled
  kgin::GraphIndex g;
};

inline TinyGraph tiny_graph() {
  TinyGraph t;
  t.cf.num_users = 3;
  t.cf.num_items = 4;
  t.cf.positives = {{0, 1}, {1, 2, 3}, {0}};
  kgin::TripleSet canonical;
  canonical.num_entities = 6;
  canonical.num_relations = 2;
  canonical.num_canonical_relations = 2;
  canonical.triples = {{0, 0, 4}, {1, 0, 4}, {1, 1, 5}, {2, 0, 5}, {3, 1, 4}};
  t.kg = kgin::add_inverse_relations(canonical);
  t.g = kgin::build_index(t.cf, t.kg);
  return t;
}

// Random synthetic dataset with inverse-doubled index, for property tests.
struct SynthFixture {
  kgin::SynthData data;
  kgin::GraphIndex g;
};

inline SynthFixture synth_fixture(std::uint64_t seed, std::size_t users = 12,
                                  std::size_t items = 10, std::size_t entities = 18,
                                  std::size_t relations = 4, std::size_t per_user = 4,
                                  double test_fraction = 0.0) {
  kgin::SynthSpec spec;
  spec.num_users = users;
  spec.num_items = items;
  spec.num_entities = entities;
  spec.num_relations = relations;
  spec.num_intents = 2;
  spec.interactions_per_user = per_user;
  spec.attributes_per_item = 2;
  spec.test_fraction = test_fraction;
  spec.seed = seed;
  SynthFixture f;
  f.data = kgin::generate(spec);
  const kgin::TripleSet doubled = kgin::add_inverse_relations(f.data.kg);
  f.g = kgin::build_index(f.data.train, doubled);
  return f;
}

inline double uniform01(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

// Fill a matrix with uniform values in [lo, hi).
inline void fill_uniform(kgin::Mat& m, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  for (double& v : m.a) v = lo + (hi - lo) * uniform01(rng);
}

}  // namespace testsup
