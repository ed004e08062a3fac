// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "kgin/error.hpp"

namespace kgin {

// Dense row-major double matrix. Deliberately minimal: the engine works in
// double precision end to end so gradient checks are meaningful.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  static Mat zeros(std::size_t r, std::size_t c) { return Mat(r, c, 0.0); }
  static Mat ones(std::size_t r, std::size_t c) { return Mat(r, c, 1.0); }

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }

  std::size_t size() const { return rows * cols; }
  bool empty() const { return a.empty(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }

  bool all_finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline bool bitwise_equal(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.a[i] != y.a[i]) return false;
  return true;
}

inline double max_abs_diff(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) throw ContractError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

// C = alpha * op(A) * op(B) + beta * C, op controlled by the transpose flags.
// Plain loops; matrices here are small (d <= 64, |P| <= 8) or batch-sized.
void gemm(bool ta, bool tb, double alpha, const Mat& A, const Mat& B, double beta, Mat& C);

// Uniform Xavier/Glorot init over the full (rows, cols) table.
void xavier_uniform(Mat& m, std::mt19937_64& rng);

}  // namespace kgin
