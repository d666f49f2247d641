// avvp/attention.hpp

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

#ifndef AVVP_ATTENTION_HPP_
#define AVVP_ATTENTION_HPP_

#include <vector>

#include "avvp/label_model.hpp"

namespace avvp {

/// Parameters of one multi-head attention map. Weights are d x d applied on
/// the right of row-major activations; biases are 1 x d.
struct AttentionBlock {
  Matrix wq, wk, wv, wo;
  Matrix bq, bk, bv, bo;

  static AttentionBlock zeros(int d_model);

  template <typename F>
  void for_each_block(F&& f) {
    f("wq", wq); f("bq", bq); f("wk", wk); f("bk", bk);
    f("wv", wv); f("bv", bv); f("wo", wo); f("bo", bo);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    f("wq", wq); f("bq", bq); f("wk", wk); f("bk", bk);
    f("wv", wv); f("bv", bv); f("wo", wo); f("bo", bo);
  }
};

struct AttentionCache {
  Matrix q, k, v;
  std::vector<Matrix> probs;  // one T_q x T_k matrix per head
  Matrix heads_out;           // concatenated head outputs, T_q x d
};

/// Scaled dot-product attention of `query_in` rows over `context_in` rows,
/// split into `heads` heads, followed by the output map.
Matrix attention_forward(const AttentionBlock& p, const Matrix& query_in,
                         const Matrix& context_in, int heads,
                         AttentionCache* cache = nullptr);

/// Accumulates parameter gradients into `grad` and input gradients into
/// `d_query_in` / `d_context_in` (which may alias for self-attention).
void attention_backward(const AttentionBlock& p, const Matrix& query_in,
                        const Matrix& context_in, int heads,
                        const AttentionCache& cache, const Matrix& d_out,
                        AttentionBlock& grad, Matrix& d_query_in,
                        Matrix& d_context_in);

}  // namespace avvp

#endif  // AVVP_ATTENTION_HPP_
