// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgin/adjacency.hpp"
#include "kgin/mat.hpp"
#include "kgin/params.hpp"

namespace kgin::ad {

using VarId = std::int32_t;
inline constexpr VarId kInvalidVar = -1;

// Numerically stable scalar nonlinearities, shared by the tape ops and the
// pure (gradient-free) loss paths so both compute bit-identical values.
double sigmoid_scalar(double x);
double softplus_scalar(double x);  // log(1 + exp(x))

enum class Op : std::uint8_t {
  kLeaf,
  kConst,
  kGatherRows,
  kScatterMean,
  kNeighborMean,
  kRelationalMean,
  kMul,
  kAdd,
  kSub,
  kMatMul,
  kSoftmaxRows,
  kSoftmaxCols,
  kRowDot,
  kSigmoid,
  kSoftplus,
  kSumAll,
  kScale,
  kDotAll,
  kRowNormalize,
  kLogsumexpRows,
  kDiagCol,
  kPairwiseAbsDiff,
  kDoubleCenter,
  kSqrt1,
  kDiv1,
};

struct Node {
  Op op;
  VarId a = -1, b = -1;
  double c0 = 0.0;              // scalar payload (scale factor)
  bool ta = false, tb = false;  // matmul transposes
  std::vector<std::int32_t> idx;
  const Csr* csr = nullptr;      // borrowed; the graph outlives the tape
  const RelCsr* rcsr = nullptr;  // borrowed
  std::vector<double> saved;     // per-op context (counts, norms)
  ParamTable* bound = nullptr;   // leaf: gradient destination
  Mat val;
  Mat grad;  // allocated lazily during backward
};

// Reverse-mode tape over dense matrices. Records one node per primitive
// application in execution order; backward() runs one reverse sweep and
// accumulates leaf gradients into their bound parameter tables. A tape is
// built fresh for every optimization step and never reused across steps.
class Tape {
 public:
  // Copies current values; gradients flow back into p.grads on backward().
  VarId leaf(ParamTable& p);
  VarId constant(Mat m);

  VarId gather_rows(VarId src, std::span<const std::int32_t> idx);
  VarId scatter_mean(VarId src, std::span<const std::int32_t> dst, std::size_t num_dst);
  VarId neighbor_mean(VarId src, const Csr& adj);
  VarId relational_mean(VarId src, VarId rels, const RelCsr& adj);

  VarId mul(VarId a, VarId b);
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId matmul(VarId a, VarId b, bool ta = false, bool tb = false);
  VarId softmax_rows(VarId a);
  VarId softmax_cols(VarId a);
  VarId row_dot(VarId a, VarId b);
  VarId sigmoid(VarId a);
  VarId softplus(VarId a);
  VarId sum(VarId a);
  VarId scale(VarId a, double c);
  VarId dot(VarId a, VarId b);
  VarId row_normalize(VarId a);
  VarId logsumexp_rows(VarId a);
  VarId diag_col(VarId a);
  VarId pairwise_absdiff(VarId a);
  VarId double_center(VarId a);
  VarId sqrt1(VarId a);
  VarId div1(VarId a, VarId b);

  const Mat& value(VarId v) const;
  // Valid after backward(); zero for nodes the loss does not reach.
  const Mat& grad(VarId v);

  // root must be 1x1; seeds d(root)/d(root) = seed. Running it twice on one
  // tape is a contract error (the tape must be rebuilt between steps).
  void backward(VarId root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  Node& at(VarId v);
  const Node& at(VarId v) const;
  VarId push(Node n);
  Mat& ensure_grad(VarId v);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace kgin::ad
