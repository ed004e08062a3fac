// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgin {

void gemm(bool ta, bool tb, double alpha, const Mat& A, const Mat& B, double beta, Mat& C) {
  const std::size_t m = ta ? A.cols : A.rows;
  const std::size_t k = ta ? A.rows : A.cols;
  const std::size_t kb = tb ? B.cols : B.rows;
  const std::size_t n = tb ? B.rows : B.cols;
  if (k != kb) throw ContractError("gemm: inner dimensions disagree");
  if (C.rows != m || C.cols != n) {
    if (beta != 0.0) throw ContractError("gemm: output shape mismatch with beta != 0");
    C = Mat::zeros(m, n);
  } else if (beta == 0.0) {
    C.fill(0.0);
  } else if (beta != 1.0) {
    for (double& v : C.a) v *= beta;
  }
  // Accumulate C[i] += alpha * opA(i, p) * opB(p, :), row at a time.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = C.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = alpha * (ta ? A(p, i) : A(i, p));
      if (av == 0.0) continue;
      if (!tb) {
        const double* brow = B.row(p);
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * B(j, p);
      }
    }
  }
}

void xavier_uniform(Mat& m, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / double(m.rows + m.cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.a) v = dist(rng);
}

namespace kernels {

Mat gather_rows(const Mat& src, std::span<const std::int32_t> idx) {
  Mat out(idx.size(), src.cols);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::int32_t i = idx[k];
    if (i < 0 || std::size_t(i) >= src.rows)
      throw ContractError("gather_rows: index " + std::to_string(i) + " out of range");
    std::copy(src.row(i), src.row(i) + src.cols, out.row(k));
  }
  return out;
}

Mat scatter_mean(const Mat& src, std::span<const std::int32_t> dst, std::size_t num_dst,
                 std::vector<double>* counts) {
  if (dst.size() != src.rows) throw ContractError("scatter_mean: one destination per source row");
  Mat out = Mat::zeros(num_dst, src.cols);
  std::vector<double> cnt(num_dst, 0.0);
  for (std::size_t k = 0; k < dst.size(); ++k) {
    const std::int32_t d = dst[k];
    if (d < 0 || std::size_t(d) >= num_dst)
      throw ContractError("scatter_mean: destination " + std::to_string(d) + " out of range");
    cnt[d] += 1.0;
    const double* s = src.row(k);
    double* o = out.row(d);
    for (std::size_t j = 0; j < src.cols; ++j) o[j] += s[j];
  }
  for (std::size_t d = 0; d < num_dst; ++d) {
    if (cnt[d] == 0.0) continue;
    double* o = out.row(d);
    for (std::size_t j = 0; j < src.cols; ++j) o[j] /= cnt[d];
  }
  if (counts) *counts = std::move(cnt);
  return out;
}

Mat neighbor_mean(const Mat& src, const Csr& adj) {
  Mat out = Mat::zeros(adj.n(), src.cols);
  for (std::size_t u = 0; u < adj.n(); ++u) {
    const std::int64_t deg = adj.deg(u);
    if (deg == 0) continue;
    double* o = out.row(u);
    for (std::int64_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
      const std::int32_t v = adj.nbr[e];
      if (v < 0 || std::size_t(v) >= src.rows)
        throw ContractError("neighbor_mean: neighbor id out of range");
      const double* s = src.row(v);
      for (std::size_t j = 0; j < src.cols; ++j) o[j] += s[j];
    }
    for (std::size_t j = 0; j < src.cols; ++j) o[j] /= double(deg);
  }
  return out;
}

Mat relational_mean(const Mat& src, const Mat& rels, const RelCsr& adj) {
  if (src.cols != rels.cols) throw ContractError("relational_mean: width mismatch");
  Mat out = Mat::zeros(adj.n(), src.cols);
  for (std::size_t h = 0; h < adj.n(); ++h) {
    const std::int64_t deg = adj.deg(h);
    if (deg == 0) continue;
    double* o = out.row(h);
    for (std::int64_t e = adj.offsets[h]; e < adj.offsets[h + 1]; ++e) {
      const std::int32_t r = adj.rel[e];
      const std::int32_t t = adj.nbr[e];
      if (t < 0 || std::size_t(t) >= src.rows || r < 0 || std::size_t(r) >= rels.rows)
        throw ContractError("relational_mean: edge id out of range");
      const double* rv = rels.row(r);
      const double* tv = src.row(t);
      for (std::size_t j = 0; j < src.cols; ++j) o[j] += rv[j] * tv[j];
    }
    for (std::size_t j = 0; j < src.cols; ++j) o[j] /= double(deg);
  }
  return out;
}

Mat softmax_rows(const Mat& x) {
  Mat y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    double m = xi[0];
    for (std::size_t j = 1; j < x.cols; ++j) m = std::max(m, xi[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      yi[j] = std::exp(xi[j] - m);
      s += yi[j];
    }
    for (std::size_t j = 0; j < x.cols; ++j) yi[j] /= s;
  }
  return y;
}

Mat softmax_cols(const Mat& x) {
  Mat y(x.rows, x.cols);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double m = x(0, j);
    for (std::size_t i = 1; i < x.rows; ++i) m = std::max(m, x(i, j));
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      y(i, j) = std::exp(x(i, j) - m);
      s += y(i, j);
    }
    for (std::size_t i = 0; i < x.rows; ++i) y(i, j) /= s;
  }
  return y;
}

Mat row_normalize(const Mat& x, std::vector<double>* norms) {
  Mat y(x.rows, x.cols);
  std::vector<double> ns(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) s += xi[j] * xi[j];
    const double n = std::sqrt(s);
    if (n == 0.0)
      throw ContractError("row_normalize: row " + std::to_string(i) + " has zero norm");
    ns[i] = n;
    double* yi = y.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) yi[j] = xi[j] / n;
  }
  if (norms) *norms = std::move(ns);
  return y;
}

Mat logsumexp_rows(const Mat& x) {
  Mat y(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double m = xi[0];
    for (std::size_t j = 1; j < x.cols; ++j) m = std::max(m, xi[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) s += std::exp(xi[j] - m);
    y(i, 0) = m + std::log(s);
  }
  return y;
}

Mat pairwise_absdiff(const Mat& x) {
  if (x.rows != 1) throw ContractError("pairwise_absdiff: expects a single-row input");
  const std::size_t n = x.cols;
  Mat a(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) a(k, l) = std::abs(x(0, k) - x(0, l));
  return a;
}

Mat double_center(const Mat& a) {
  if (a.rows != a.cols) throw ContractError("double_center: square input required");
  const std::size_t n = a.rows;
  std::vector<double> rmean(n, 0.0), cmean(n, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      rmean[k] += a(k, l);
      cmean[l] += a(k, l);
      total += a(k, l);
    }
  for (std::size_t k = 0; k < n; ++k) {
    rmean[k] /= double(n);
    cmean[k] /= double(n);
  }
  total /= double(n) * double(n);
  Mat y(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) y(k, l) = a(k, l) - rmean[k] - cmean[l] + total;
  return y;
}

double dot_all(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) throw ContractError("dot_all: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.a[i] * y.a[i];
  return s;
}

}  // namespace kernels
}  // namespace kgin
