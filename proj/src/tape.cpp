// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/tape.hpp"

#include <cmath>
#include <string>

#include "kgin/error.hpp"
#include "kgin/kernels.hpp"

namespace kgin::ad {

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Node& Tape::at(VarId v) {
  if (v < 0 || std::size_t(v) >= nodes_.size()) throw ContractError("tape: bad var id");
  return nodes_[std::size_t(v)];
}

const Node& Tape::at(VarId v) const {
  if (v < 0 || std::size_t(v) >= nodes_.size()) throw ContractError("tape: bad var id");
  return nodes_[std::size_t(v)];
}

VarId Tape::push(Node n) {
  if (backward_done_) throw ContractError("tape: cannot record after backward");
  nodes_.push_back(std::move(n));
  return VarId(nodes_.size() - 1);
}

Mat& Tape::ensure_grad(VarId v) {
  Node& n = at(v);
  if (n.grad.empty() && n.val.size() > 0) n.grad = Mat::zeros(n.val.rows, n.val.cols);
  return n.grad;
}

const Mat& Tape::value(VarId v) const { return at(v).val; }

const Mat& Tape::grad(VarId v) { return ensure_grad(v); }

VarId Tape::leaf(ParamTable& p) {
  Node n;
  n.op = Op::kLeaf;
  n.bound = &p;
  n.val = p.values;
  return push(std::move(n));
}

VarId Tape::constant(Mat m) {
  Node n;
  n.op = Op::kConst;
  n.val = std::move(m);
  return push(std::move(n));
}

VarId Tape::gather_rows(VarId src, std::span<const std::int32_t> idx) {
  Node n;
  n.op = Op::kGatherRows;
  n.a = src;
  n.idx.assign(idx.begin(), idx.end());
  n.val = kernels::gather_rows(at(src).val, idx);
  return push(std::move(n));
}

VarId Tape::scatter_mean(VarId src, std::span<const std::int32_t> dst, std::size_t num_dst) {
  Node n;
  n.op = Op::kScatterMean;
  n.a = src;
  n.idx.assign(dst.begin(), dst.end());
  n.val = kernels::scatter_mean(at(src).val, dst, num_dst, &n.saved);
  return push(std::move(n));
}

VarId Tape::neighbor_mean(VarId src, const Csr& adj) {
  Node n;
  n.op = Op::kNeighborMean;
  n.a = src;
  n.csr = &adj;
  n.val = kernels::neighbor_mean(at(src).val, adj);
  return push(std::move(n));
}

VarId Tape::relational_mean(VarId src, VarId rels, const RelCsr& adj) {
  Node n;
  n.op = Op::kRelationalMean;
  n.a = src;
  n.b = rels;
  n.rcsr = &adj;
  n.val = kernels::relational_mean(at(src).val, at(rels).val, adj);
  return push(std::move(n));
}

VarId Tape::mul(VarId a, VarId b) {
  const Mat& x = at(a).val;
  const Mat& y = at(b).val;
  if (!x.same_shape(y)) throw ContractError("tape.mul: shape mismatch");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = x.a[i] * y.a[i];
  return push(std::move(n));
}

VarId Tape::add(VarId a, VarId b) {
  const Mat& x = at(a).val;
  const Mat& y = at(b).val;
  if (!x.same_shape(y)) throw ContractError("tape.add: shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = x.a[i] + y.a[i];
  return push(std::move(n));
}

VarId Tape::sub(VarId a, VarId b) {
  const Mat& x = at(a).val;
  const Mat& y = at(b).val;
  if (!x.same_shape(y)) throw ContractError("tape.sub: shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = x.a[i] - y.a[i];
  return push(std::move(n));
}

VarId Tape::matmul(VarId a, VarId b, bool ta, bool tb) {
  Node n;
  n.op = Op::kMatMul;
  n.a = a;
  n.b = b;
  n.ta = ta;
  n.tb = tb;
  gemm(ta, tb, 1.0, at(a).val, at(b).val, 0.0, n.val);
  return push(std::move(n));
}

VarId Tape::softmax_rows(VarId a) {
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a;
  n.val = kernels::softmax_rows(at(a).val);
  return push(std::move(n));
}

VarId Tape::softmax_cols(VarId a) {
  Node n;
  n.op = Op::kSoftmaxCols;
  n.a = a;
  n.val = kernels::softmax_cols(at(a).val);
  return push(std::move(n));
}

VarId Tape::row_dot(VarId a, VarId b) {
  const Mat& x = at(a).val;
  const Mat& y = at(b).val;
  if (!x.same_shape(y)) throw ContractError("tape.row_dot: shape mismatch");
  Node n;
  n.op = Op::kRowDot;
  n.a = a;
  n.b = b;
  n.val = Mat(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double s = 0.0;
    const double* xi = x.row(i);
    const double* yi = y.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) s += xi[j] * yi[j];
    n.val(i, 0) = s;
  }
  return push(std::move(n));
}

VarId Tape::sigmoid(VarId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  const Mat& x = at(a).val;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = sigmoid_scalar(x.a[i]);
  return push(std::move(n));
}

VarId Tape::softplus(VarId a) {
  Node n;
  n.op = Op::kSoftplus;
  n.a = a;
  const Mat& x = at(a).val;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = softplus_scalar(x.a[i]);
  return push(std::move(n));
}

VarId Tape::sum(VarId a) {
  Node n;
  n.op = Op::kSumAll;
  n.a = a;
  double s = 0.0;
  for (double v : at(a).val.a) s += v;
  n.val = Mat(1, 1);
  n.val(0, 0) = s;
  return push(std::move(n));
}

VarId Tape::scale(VarId a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.c0 = c;
  const Mat& x = at(a).val;
  n.val = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) n.val.a[i] = c * x.a[i];
  return push(std::move(n));
}

VarId Tape::dot(VarId a, VarId b) {
  Node n;
  n.op = Op::kDotAll;
  n.a = a;
  n.b = b;
  n.val = Mat(1, 1);
  n.val(0, 0) = kernels::dot_all(at(a).val, at(b).val);
  return push(std::move(n));
}

VarId Tape::row_normalize(VarId a) {
  Node n;
  n.op = Op::kRowNormalize;
  n.a = a;
  n.val = kernels::row_normalize(at(a).val, &n.saved);
  return push(std::move(n));
}

VarId Tape::logsumexp_rows(VarId a) {
  Node n;
  n.op = Op::kLogsumexpRows;
  n.a = a;
  n.val = kernels::logsumexp_rows(at(a).val);
  return push(std::move(n));
}

VarId Tape::diag_col(VarId a) {
  const Mat& x = at(a).val;
  if (x.rows != x.cols) throw ContractError("tape.diag_col: square input required");
  Node n;
  n.op = Op::kDiagCol;
  n.a = a;
  n.val = Mat(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) n.val(i, 0) = x(i, i);
  return push(std::move(n));
}

VarId Tape::pairwise_absdiff(VarId a) {
  Node n;
  n.op = Op::kPairwiseAbsDiff;
  n.a = a;
  n.val = kernels::pairwise_absdiff(at(a).val);
  return push(std::move(n));
}

VarId Tape::double_center(VarId a) {
  Node n;
  n.op = Op::kDoubleCenter;
  n.a = a;
  n.val = kernels::double_center(at(a).val);
  return push(std::move(n));
}

VarId Tape::sqrt1(VarId a) {
  const Mat& x = at(a).val;
  if (x.rows != 1 || x.cols != 1) throw ContractError("tape.sqrt1: scalar input required");
  Node n;
  n.op = Op::kSqrt1;
  n.a = a;
  n.val = Mat(1, 1);
  n.val(0, 0) = x(0, 0) > 0.0 ? std::sqrt(x(0, 0)) : 0.0;
  return push(std::move(n));
}

VarId Tape::div1(VarId a, VarId b) {
  const Mat& x = at(a).val;
  const Mat& y = at(b).val;
  if (x.size() != 1 || y.size() != 1) throw ContractError("tape.div1: scalar inputs required");
  Node n;
  n.op = Op::kDiv1;
  n.a = a;
  n.b = b;
  n.val = Mat(1, 1);
  n.val(0, 0) = y(0, 0) != 0.0 ? x(0, 0) / y(0, 0) : 0.0;
  return push(std::move(n));
}

void Tape::backward(VarId root, double seed) {
  if (backward_done_) throw ContractError("tape.backward: already ran on this tape");
  backward_done_ = true;
  {
    const Mat& r = at(root).val;
    if (r.rows != 1 || r.cols != 1)
      throw ContractError("tape.backward: root must be a 1x1 scalar");
  }
  ensure_grad(root)(0, 0) = seed;

  for (VarId v = root; v >= 0; --v) {
    Node& n = nodes_[std::size_t(v)];
    if (n.grad.empty()) continue;  // loss does not depend on this node
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kGatherRows: {
        Mat& da = ensure_grad(n.a);
        for (std::size_t k = 0; k < n.idx.size(); ++k) {
          double* d = da.row(std::size_t(n.idx[k]));
          const double* gr = g.row(k);
          for (std::size_t j = 0; j < g.cols; ++j) d[j] += gr[j];
        }
        break;
      }
      case Op::kScatterMean: {
        Mat& da = ensure_grad(n.a);
        for (std::size_t k = 0; k < n.idx.size(); ++k) {
          const std::size_t d = std::size_t(n.idx[k]);
          const double c = n.saved[d];
          const double* gr = g.row(d);
          double* dr = da.row(k);
          for (std::size_t j = 0; j < g.cols; ++j) dr[j] += gr[j] / c;
        }
        break;
      }
      case Op::kNeighborMean: {
        Mat& da = ensure_grad(n.a);
        const Csr& adj = *n.csr;
        for (std::size_t u = 0; u < adj.n(); ++u) {
          const std::int64_t deg = adj.deg(u);
          if (deg == 0) continue;
          const double* gu = g.row(u);
          for (std::int64_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
            double* d = da.row(std::size_t(adj.nbr[e]));
            for (std::size_t j = 0; j < g.cols; ++j) d[j] += gu[j] / double(deg);
          }
        }
        break;
      }
      case Op::kRelationalMean: {
        Mat& dsrc = ensure_grad(n.a);
        Mat& drel = ensure_grad(n.b);
        const Mat& src = at(n.a).val;
        const Mat& rels = at(n.b).val;
        const RelCsr& adj = *n.rcsr;
        for (std::size_t h = 0; h < adj.n(); ++h) {
          const std::int64_t deg = adj.deg(h);
          if (deg == 0) continue;
          const double* gh = g.row(h);
          for (std::int64_t e = adj.offsets[h]; e < adj.offsets[h + 1]; ++e) {
            const std::size_t r = std::size_t(adj.rel[e]);
            const std::size_t t = std::size_t(adj.nbr[e]);
            double* ds = dsrc.row(t);
            double* dr = drel.row(r);
            const double* rv = rels.row(r);
            const double* tv = src.row(t);
            for (std::size_t j = 0; j < g.cols; ++j) {
              const double gj = gh[j] / double(deg);
              ds[j] += gj * rv[j];
              dr[j] += gj * tv[j];
            }
          }
        }
        break;
      }
      case Op::kMul: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        const Mat& x = at(n.a).val;
        const Mat& y = at(n.b).val;
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.a[i] += g.a[i] * y.a[i];
          db.a[i] += g.a[i] * x.a[i];
        }
        break;
      }
      case Op::kAdd: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.a[i] += g.a[i];
          db.a[i] += g.a[i];
        }
        break;
      }
      case Op::kSub: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.a[i] += g.a[i];
          db.a[i] -= g.a[i];
        }
        break;
      }
      case Op::kMatMul: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        const Mat& A = at(n.a).val;
        const Mat& B = at(n.b).val;
        if (!n.ta && !n.tb) {
          gemm(false, true, 1.0, g, B, 1.0, da);
          gemm(true, false, 1.0, A, g, 1.0, db);
        } else if (n.ta && !n.tb) {
          gemm(false, true, 1.0, B, g, 1.0, da);
          gemm(false, false, 1.0, A, g, 1.0, db);
        } else if (!n.ta && n.tb) {
          gemm(false, false, 1.0, g, B, 1.0, da);
          gemm(true, false, 1.0, g, A, 1.0, db);
        } else {
          gemm(true, true, 1.0, B, g, 1.0, da);
          gemm(true, true, 1.0, g, A, 1.0, db);
        }
        break;
      }
      case Op::kSoftmaxRows: {
        Mat& da = ensure_grad(n.a);
        const Mat& y = n.val;
        for (std::size_t i = 0; i < y.rows; ++i) {
          const double* yi = y.row(i);
          const double* gi = g.row(i);
          double dotgy = 0.0;
          for (std::size_t j = 0; j < y.cols; ++j) dotgy += gi[j] * yi[j];
          double* d = da.row(i);
          for (std::size_t j = 0; j < y.cols; ++j) d[j] += yi[j] * (gi[j] - dotgy);
        }
        break;
      }
      case Op::kSoftmaxCols: {
        Mat& da = ensure_grad(n.a);
        const Mat& y = n.val;
        for (std::size_t j = 0; j < y.cols; ++j) {
          double dotgy = 0.0;
          for (std::size_t i = 0; i < y.rows; ++i) dotgy += g(i, j) * y(i, j);
          for (std::size_t i = 0; i < y.rows; ++i) da(i, j) += y(i, j) * (g(i, j) - dotgy);
        }
        break;
      }
      case Op::kRowDot: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        const Mat& x = at(n.a).val;
        const Mat& y = at(n.b).val;
        for (std::size_t i = 0; i < x.rows; ++i) {
          const double gi = g(i, 0);
          const double* xi = x.row(i);
          const double* yi = y.row(i);
          double* dai = da.row(i);
          double* dbi = db.row(i);
          for (std::size_t j = 0; j < x.cols; ++j) {
            dai[j] += gi * yi[j];
            dbi[j] += gi * xi[j];
          }
        }
        break;
      }
      case Op::kSigmoid: {
        Mat& da = ensure_grad(n.a);
        const Mat& y = n.val;
        for (std::size_t i = 0; i < y.size(); ++i) da.a[i] += g.a[i] * y.a[i] * (1.0 - y.a[i]);
        break;
      }
      case Op::kSoftplus: {
        Mat& da = ensure_grad(n.a);
        const Mat& x = at(n.a).val;
        for (std::size_t i = 0; i < x.size(); ++i) da.a[i] += g.a[i] * sigmoid_scalar(x.a[i]);
        break;
      }
      case Op::kSumAll: {
        Mat& da = ensure_grad(n.a);
        const double s = g(0, 0);
        for (std::size_t i = 0; i < da.size(); ++i) da.a[i] += s;
        break;
      }
      case Op::kScale: {
        Mat& da = ensure_grad(n.a);
        for (std::size_t i = 0; i < da.size(); ++i) da.a[i] += n.c0 * g.a[i];
        break;
      }
      case Op::kDotAll: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        const Mat& x = at(n.a).val;
        const Mat& y = at(n.b).val;
        const double s = g(0, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
          da.a[i] += s * y.a[i];
          db.a[i] += s * x.a[i];
        }
        break;
      }
      case Op::kRowNormalize: {
        Mat& da = ensure_grad(n.a);
        const Mat& y = n.val;
        for (std::size_t i = 0; i < y.rows; ++i) {
          const double* yi = y.row(i);
          const double* gi = g.row(i);
          const double norm = n.saved[i];
          double dotgy = 0.0;
          for (std::size_t j = 0; j < y.cols; ++j) dotgy += gi[j] * yi[j];
          double* d = da.row(i);
          for (std::size_t j = 0; j < y.cols; ++j) d[j] += (gi[j] - dotgy * yi[j]) / norm;
        }
        break;
      }
      case Op::kLogsumexpRows: {
        Mat& da = ensure_grad(n.a);
        const Mat& x = at(n.a).val;
        for (std::size_t i = 0; i < x.rows; ++i) {
          const double gi = g(i, 0);
          const double yi = n.val(i, 0);
          double* d = da.row(i);
          const double* xi = x.row(i);
          for (std::size_t j = 0; j < x.cols; ++j) d[j] += gi * std::exp(xi[j] - yi);
        }
        break;
      }
      case Op::kDiagCol: {
        Mat& da = ensure_grad(n.a);
        for (std::size_t i = 0; i < g.rows; ++i) da(i, i) += g(i, 0);
        break;
      }
      case Op::kPairwiseAbsDiff: {
        Mat& da = ensure_grad(n.a);
        const Mat& x = at(n.a).val;
        const std::size_t m = x.cols;
        for (std::size_t k = 0; k < m; ++k) {
          double acc = 0.0;
          for (std::size_t l = 0; l < m; ++l) {
            const double diff = x(0, k) - x(0, l);
            const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            acc += (g(k, l) + g(l, k)) * sgn;
          }
          da(0, k) += acc;
        }
        break;
      }
      case Op::kDoubleCenter: {
        // The centering map is self-adjoint: pull the gradient through itself.
        Mat& da = ensure_grad(n.a);
        Mat cg = kernels::double_center(g);
        for (std::size_t i = 0; i < cg.size(); ++i) da.a[i] += cg.a[i];
        break;
      }
      case Op::kSqrt1: {
        Mat& da = ensure_grad(n.a);
        const double x = at(n.a).val(0, 0);
        if (x > 0.0) da(0, 0) += g(0, 0) / (2.0 * n.val(0, 0));
        break;
      }
      case Op::kDiv1: {
        Mat& da = ensure_grad(n.a);
        Mat& db = ensure_grad(n.b);
        const double xa = at(n.a).val(0, 0);
        const double xb = at(n.b).val(0, 0);
        if (xb != 0.0) {
          da(0, 0) += g(0, 0) / xb;
          db(0, 0) -= g(0, 0) * xa / (xb * xb);
        }
        break;
      }
    }
  }

  // Deposit leaf gradients into their bound tables.
  for (Node& n : nodes_) {
    if (n.op != Op::kLeaf || n.grad.empty()) continue;
    if (!n.bound->grads.same_shape(n.grad))
      throw ContractError("tape.backward: leaf/param shape drift for '" + n.bound->name + "'");
    for (std::size_t i = 0; i < n.grad.size(); ++i) n.bound->grads.a[i] += n.grad.a[i];
  }
}

}  // namespace kgin::ad
