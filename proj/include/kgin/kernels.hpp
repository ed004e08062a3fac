// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgin/adjacency.hpp"
#include "kgin/mat.hpp"

namespace kgin::kernels {

// Forward kernels shared by the autodiff tape and the pure (inference-time)
// entry points, so training and inference run the exact same arithmetic.

Mat gather_rows(const Mat& src, std::span<const std::int32_t> idx);

// out[d] = mean of src rows scattered to d; zero-count destinations stay zero.
// counts, when non-null, receives the per-destination row count.
Mat scatter_mean(const Mat& src, std::span<const std::int32_t> dst, std::size_t num_dst,
                 std::vector<double>* counts = nullptr);

// out[u] = mean over adj neighbors v of src[v]; degree-0 rows are zero.
Mat neighbor_mean(const Mat& src, const Csr& adj);

// out[h] = mean over adj edges (r, t) of rels[r] * src[t]  (elementwise product).
// Degree-0 rows are zero. This is the relation-modulated neighborhood mean used
// by the entity-side message passing.
Mat relational_mean(const Mat& src, const Mat& rels, const RelCsr& adj);

Mat softmax_rows(const Mat& x);
Mat softmax_cols(const Mat& x);

// y[i] = x[i] / ||x[i]||_2 per row; throws ContractError on a zero row.
// norms, when non-null, receives the per-row norm.
Mat row_normalize(const Mat& x, std::vector<double>* norms = nullptr);

// y[i] = log(sum_j exp(x[i][j])), max-shifted for stability. Result (n, 1).
Mat logsumexp_rows(const Mat& x);

// A[k][l] = |x[k] - x[l]| for a single-row input x of width n. Result (n, n).
Mat pairwise_absdiff(const Mat& x);

// A[k][l] - rowmean[k] - colmean[l] + totalmean. Self-adjoint linear map.
Mat double_center(const Mat& a);

double dot_all(const Mat& x, const Mat& y);

}  // namespace kgin::kernels
