// src/attention.cpp

// Copyright 2026  The avvp-labelkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "avvp/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace avvp {

AttentionBlock AttentionBlock::zeros(int d_model) {
  AttentionBlock b;
  for (Matrix* w : {&b.wq, &b.wk, &b.wv, &b.wo}) *w = Matrix::Zero(d_model, d_model);
  for (Matrix* v : {&b.bq, &b.bk, &b.bv, &b.bo}) *v = Matrix::Zero(1, d_model);
  return b;
}

namespace {

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  return (x * w).rowwise() + b.row(0);
}

void softmax_rows_inplace(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double peak = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - peak).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

}  // namespace

Matrix attention_forward(const AttentionBlock& p, const Matrix& query_in,
                         const Matrix& context_in, int heads,
                         AttentionCache* cache) {
  const Eigen::Index d = p.wq.cols();
  if (heads < 1 || d % heads != 0)
    throw std::invalid_argument("attention: heads must divide the model dimension");
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix q = affine(query_in, p.wq, p.bq);
  Matrix k = affine(context_in, p.wk, p.bk);
  Matrix v = affine(context_in, p.wv, p.bv);
  Matrix heads_out(query_in.rows(), d);
  std::vector<Matrix> probs;
  probs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * dh, dh);
    const auto kh = k.middleCols(h * dh, dh);
    const auto vh = v.middleCols(h * dh, dh);
    Matrix a = (qh * kh.transpose()) * scale;
    softmax_rows_inplace(a);
    heads_out.middleCols(h * dh, dh) = a * vh;
    probs.push_back(std::move(a));
  }
  Matrix out = affine(heads_out, p.wo, p.bo);
  if (cache) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->heads_out = std::move(heads_out);
  }
  return out;
}

void attention_backward(const AttentionBlock& p, const Matrix& query_in,
                        const Matrix& context_in, int heads,
                        const AttentionCache& cache, const Matrix& d_out,
                        AttentionBlock& grad, Matrix& d_query_in,
                        Matrix& d_context_in) {
  const Eigen::Index d = p.wq.cols();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  grad.wo.noalias() += cache.heads_out.transpose() * d_out;
  grad.bo += d_out.colwise().sum();
  const Matrix d_heads = d_out * p.wo.transpose();

  Matrix dq(cache.q.rows(), d), dk(cache.k.rows(), d), dv(cache.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Matrix& a = cache.probs[static_cast<std::size_t>(h)];
    const auto qh = cache.q.middleCols(h * dh, dh);
    const auto kh = cache.k.middleCols(h * dh, dh);
    const auto vh = cache.v.middleCols(h * dh, dh);
    const auto doh = d_heads.middleCols(h * dh, dh);

    dv.middleCols(h * dh, dh) = a.transpose() * doh;
    const Matrix da = doh * vh.transpose();
    // softmax backward, row by row
    const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
    const Matrix ds = (a.array() * (da.colwise() - row_dot).array()).matrix() * scale;
    dq.middleCols(h * dh, dh) = ds * kh;
    dk.middleCols(h * dh, dh) = ds.transpose() * qh;
  }

  grad.wq.noalias() += query_in.transpose() * dq;
  grad.bq += dq.colwise().sum();
  grad.wk.noalias() += context_in.transpose() * dk;
  grad.bk += dk.colwise().sum();
  grad.wv.noalias() += context_in.transpose() * dv;
  grad.bv += dv.colwise().sum();

  d_query_in.noalias() += dq * p.wq.transpose();
  d_context_in.noalias() += dk * p.wk.transpose();
  d_context_in.noalias() += dv * p.wv.transpose();
}

}  // namespace avvp
