// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#include "kgin/independence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kgin/error.hpp"
#include "kgin/kernels.hpp"

namespace kgin {

namespace {

void check_no_zero_rows(const Mat& intents, const char* who) {
  for (std::size_t p = 0; p < intents.rows; ++p) {
    double norm2 = 0.0;
    const double* row = intents.row(p);
    for (std::size_t j = 0; j < intents.cols; ++j) norm2 += row[j] * row[j];
    if (norm2 == 0.0)
      throw DegenerateInputError(std::string(who) + ": intent " + std::to_string(p) +
                                 " has a zero-norm embedding");
  }
}

}  // namespace

DcorResult dcor(const double* x, const double* y, std::size_t d) {
  if (d < 2) throw ContractError("dcor: need at least 2 coordinates");
  Mat xr(1, d), yr(1, d);
  std::copy(x, x + d, xr.a.begin());
  std::copy(y, y + d, yr.a.begin());
  const Mat ac = kernels::double_center(kernels::pairwise_absdiff(xr));
  const Mat bc = kernels::double_center(kernels::pairwise_absdiff(yr));
  const double n2 = double(d) * double(d);
  const double vxy = kernels::dot_all(ac, bc) / n2;
  const double vxx = kernels::dot_all(ac, ac) / n2;
  const double vyy = kernels::dot_all(bc, bc) / n2;
  const double dvx = vxx > 0.0 ? std::sqrt(vxx) : 0.0;
  const double dvy = vyy > 0.0 ? std::sqrt(vyy) : 0.0;
  const double prod = dvx * dvy;
  if (prod == 0.0) return {0.0, true};
  const double dcov = vxy > 0.0 ? std::sqrt(vxy) : 0.0;
  double r = dcov / std::sqrt(prod);
  r = std::clamp(r, 0.0, 1.0);
  return {r, false};
}

DcorResult dcor_rows(const Mat& m, std::size_t p, std::size_t q) {
  if (p >= m.rows || q >= m.rows) throw ContractError("dcor_rows: row out of range");
  return dcor(m.row(p), m.row(q), m.cols);
}

PairwiseLoss dcor_loss(const Mat& intents) {
  PairwiseLoss out;
  if (intents.rows < 2) return out;
  for (std::size_t p = 0; p < intents.rows; ++p)
    for (std::size_t q = p + 1; q < intents.rows; ++q) {
      const DcorResult r = dcor_rows(intents, p, q);
      out.value += r.value;
      if (r.degenerate) ++out.degenerate_pairs;
    }
  return out;
}

double mean_pairwise_dcor(const Mat& intents) {
  if (intents.rows < 2) return 0.0;
  const PairwiseLoss l = dcor_loss(intents);
  const double pairs = double(intents.rows) * double(intents.rows - 1) / 2.0;
  return l.value / pairs;
}

double mi_loss(const Mat& intents, double tau) {
  if (tau <= 0.0) throw ContractError("mi_loss: tau must be positive");
  check_no_zero_rows(intents, "mi_loss");
  const Mat n = kernels::row_normalize(intents);
  Mat s;
  gemm(false, true, 1.0 / tau, n, n, 0.0, s);  // cosine similarities / tau
  const Mat lse = kernels::logsumexp_rows(s);
  double loss = 0.0;
  for (std::size_t p = 0; p < s.rows; ++p) loss += lse(p, 0) - s(p, p);
  return loss;
}

ad::VarId build_mi_loss(ad::Tape& t, ad::VarId intent_embs, double tau) {
  if (tau <= 0.0) throw ContractError("build_mi_loss: tau must be positive");
  check_no_zero_rows(t.value(intent_embs), "mi_loss");
  const ad::VarId n = t.row_normalize(intent_embs);
  const ad::VarId s = t.scale(t.matmul(n, n, false, true), 1.0 / tau);
  const ad::VarId lse = t.logsumexp_rows(s);
  const ad::VarId dg = t.diag_col(s);
  return t.sum(t.sub(lse, dg));
}

ad::VarId build_dcor_loss(ad::Tape& t, ad::VarId intent_embs) {
  // Copy the shape out: recording nodes below reallocates tape storage, so a
  // reference from t.value() must not be held across the recordings.
  const std::size_t num_intents = t.value(intent_embs).rows;
  const std::size_t dim = t.value(intent_embs).cols;
  if (num_intents < 2) return t.constant(Mat::zeros(1, 1));
  if (dim < 2) throw ContractError("build_dcor_loss: need at least 2 coordinates");
  const double n2 = double(dim) * double(dim);

  std::vector<ad::VarId> centered(num_intents);
  std::vector<ad::VarId> dvar(num_intents);  // sqrt of per-intent distance variance
  for (std::size_t p = 0; p < num_intents; ++p) {
    const std::int32_t pi = std::int32_t(p);
    const ad::VarId row = t.gather_rows(intent_embs, std::span<const std::int32_t>(&pi, 1));
    centered[p] = t.double_center(t.pairwise_absdiff(row));
    dvar[p] = t.sqrt1(t.scale(t.dot(centered[p], centered[p]), 1.0 / n2));
  }

  ad::VarId total = t.constant(Mat::zeros(1, 1));
  for (std::size_t p = 0; p < num_intents; ++p)
    for (std::size_t q = p + 1; q < num_intents; ++q) {
      const ad::VarId vxy = t.scale(t.dot(centered[p], centered[q]), 1.0 / n2);
      const ad::VarId dcov = t.sqrt1(vxy);
      const ad::VarId denom = t.sqrt1(t.mul(dvar[p], dvar[q]));
      total = t.add(total, t.div1(dcov, denom));
    }
  return total;
}

}  // namespace kgin
