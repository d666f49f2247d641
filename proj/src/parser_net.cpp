// src/parser_net.cpp

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

#include "avvp/parser_net.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "avvp/rng.hpp"

namespace avvp {

void FeatureBundle::check() const {
  if (audio.rows() < 1 || audio.rows() != visual.rows()) {
    std::ostringstream os;
    os << "FeatureBundle: audio has " << audio.rows() << " segments, visual has "
       << visual.rows();
    throw std::invalid_argument(os.str());
  }
  if (!audio.allFinite() || !visual.allFinite())
    throw std::invalid_argument("FeatureBundle: non-finite feature value");
}

void ModelShape::check() const {
  if (audio_dim < 1 || visual_dim < 1 || d_model < 1 || heads < 1 || classes < 1)
    throw std::invalid_argument("ModelShape: all dimensions must be positive");
  if (d_model % heads != 0)
    throw std::invalid_argument("ModelShape: heads must divide d_model");
}

ModelParams ModelParams::zeros(const ModelShape& shape) {
  shape.check();
  const int d = shape.d_model, c = shape.classes;
  ModelParams p;
  p.shape = shape;
  p.proj_audio_w = Matrix::Zero(shape.audio_dim, d);
  p.proj_audio_b = Matrix::Zero(1, d);
  p.proj_visual_w = Matrix::Zero(shape.visual_dim, d);
  p.proj_visual_b = Matrix::Zero(1, d);
  p.self_audio = AttentionBlock::zeros(d);
  p.cross_audio = AttentionBlock::zeros(d);
  p.self_visual = AttentionBlock::zeros(d);
  p.cross_visual = AttentionBlock::zeros(d);
  p.classifier_w = Matrix::Zero(d, c);
  p.classifier_b = Matrix::Zero(1, c);
  p.temporal_att_w = Matrix::Zero(d, c);
  p.temporal_att_b = Matrix::Zero(1, c);
  p.modality_att_w = Matrix::Zero(d, c);
  p.modality_att_b = Matrix::Zero(1, c);
  return p;
}

ModelParams ModelParams::initialized(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p = zeros(shape);
  Rng rng(seed);
  p.for_each_block([&](const std::string&, Matrix& m) {
    if (m.rows() == 1) return;  // biases stay zero
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
  });
  return p;
}

void ModelParams::check() const {
  shape.check();
  const ModelParams ref = zeros(shape);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dims;
  ref.for_each_block([&](const std::string&, const Matrix& m) {
    dims.emplace_back(m.rows(), m.cols());
  });
  std::size_t i = 0;
  for_each_block([&](const std::string& name, const Matrix& m) {
    if (m.rows() != dims[i].first || m.cols() != dims[i].second) {
      std::ostringstream os;
      os << "ModelParams: block " << name << " is " << m.rows() << "x" << m.cols()
         << ", expected " << dims[i].first << "x" << dims[i].second;
      throw std::invalid_argument(os.str());
    }
    if (!m.allFinite())
      throw std::invalid_argument("ModelParams: block " + name + " is not finite");
    ++i;
  });
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = 0;
  for_each_block([&](const std::string&, const Matrix& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

namespace {

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  return (x * w).rowwise() + b.row(0);
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

// Softmax over rows (segments) independently for each column (class).
Matrix softmax_columns(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double peak = z.col(c).maxCoeff();
    out.col(c) = (z.col(c).array() - peak).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

}  // namespace

PooledPredictions mmil_pool(const PoolingInputs& in) {
  const Eigen::Index T = in.prob_audio.rows(), C = in.prob_audio.cols();
  auto same = [&](const Matrix& m) { return m.rows() == T && m.cols() == C; };
  if (T < 1 || !same(in.prob_visual) || !same(in.temporal_logits_audio) ||
      !same(in.temporal_logits_visual) || in.modality_logits_audio.size() != C ||
      in.modality_logits_visual.size() != C)
    throw std::invalid_argument("mmil_pool: inconsistent input shapes");

  PooledPredictions out;
  out.temporal_weights_audio = softmax_columns(in.temporal_logits_audio);
  out.temporal_weights_visual = softmax_columns(in.temporal_logits_visual);
  out.audio = (out.temporal_weights_audio.array() * in.prob_audio.array())
                  .colwise().sum().transpose();
  out.visual = (out.temporal_weights_visual.array() * in.prob_visual.array())
                   .colwise().sum().transpose();
  out.audio_weight.resize(C);
  out.union_.resize(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    const double z = in.modality_logits_audio(c) - in.modality_logits_visual(c);
    const double wa = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                               : std::exp(z) / (1.0 + std::exp(z));
    out.audio_weight(c) = wa;
    out.union_(c) = wa * out.audio(c) + (1.0 - wa) * out.visual(c);
  }
  // Rounding can push a convex combination of probabilities a hair past 1.
  out.audio = out.audio.cwiseMin(1.0);
  out.visual = out.visual.cwiseMin(1.0);
  out.union_ = out.union_.cwiseMin(1.0);
  return out;
}

PredictionSet han_forward(const FeatureBundle& features, const ModelParams& params,
                          ForwardCache* cache) {
  features.check();
  const ModelShape& s = params.shape;
  if (features.audio.cols() != s.audio_dim || features.visual.cols() != s.visual_dim) {
    std::ostringstream os;
    os << "han_forward: features are " << features.audio.cols() << "/"
       << features.visual.cols() << " wide, model expects " << s.audio_dim << "/"
       << s.visual_dim;
    throw std::invalid_argument(os.str());
  }

  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.proj_audio = affine(features.audio, params.proj_audio_w, params.proj_audio_b);
  fc.proj_visual = affine(features.visual, params.proj_visual_w, params.proj_visual_b);

  const Matrix& fa = fc.proj_audio;
  const Matrix& fv = fc.proj_visual;
  fc.fused_audio = fa + attention_forward(params.self_audio, fa, fa, s.heads, &fc.self_audio) +
                   attention_forward(params.cross_audio, fa, fv, s.heads, &fc.cross_audio);
  fc.fused_visual = fv + attention_forward(params.self_visual, fv, fv, s.heads, &fc.self_visual) +
                    attention_forward(params.cross_visual, fv, fa, s.heads, &fc.cross_visual);

  PoolingInputs& pin = fc.pooling;
  pin.prob_audio = sigmoid(affine(fc.fused_audio, params.classifier_w, params.classifier_b));
  pin.prob_visual = sigmoid(affine(fc.fused_visual, params.classifier_w, params.classifier_b));
  pin.temporal_logits_audio =
      affine(fc.fused_audio, params.temporal_att_w, params.temporal_att_b);
  pin.temporal_logits_visual =
      affine(fc.fused_visual, params.temporal_att_w, params.temporal_att_b);
  pin.modality_logits_audio =
      (fc.fused_audio.colwise().mean() * params.modality_att_w + params.modality_att_b)
          .transpose();
  pin.modality_logits_visual =
      (fc.fused_visual.colwise().mean() * params.modality_att_w + params.modality_att_b)
          .transpose();
  fc.pooled = mmil_pool(pin);

  PredictionSet out;
  out.audio = pin.prob_audio;
  out.visual = pin.prob_visual;
  out.audio_visual = (out.audio.array() * out.visual.array()).matrix();
  out.video_audio = fc.pooled.audio;
  out.video_visual = fc.pooled.visual;
  out.video_union = fc.pooled.union_;
  if (!out.audio.allFinite() || !out.visual.allFinite() || !out.video_union.allFinite())
    throw std::runtime_error("han_forward: non-finite prediction");
  return out;
}

namespace {

// Backward through p = sum_t softmax_t(z)[t,c] * prob[t,c] for one modality.
void temporal_pool_backward(const Matrix& weights, const Matrix& prob,
                            const Vector& d_pooled, Matrix& d_prob, Matrix& d_logits) {
  d_prob = (weights.array().rowwise() * d_pooled.transpose().array()).matrix();
  const Matrix d_w = (prob.array().rowwise() * d_pooled.transpose().array()).matrix();
  const Eigen::RowVectorXd dot = (d_w.array() * weights.array()).colwise().sum();
  d_logits = (weights.array() * (d_w.rowwise() - dot).array()).matrix();
}

}  // namespace

ModelParams han_backward(const FeatureBundle& features, const ModelParams& params,
                         const ForwardCache& fc, const LossGradients& d_loss) {
  const ModelShape& s = params.shape;
  const double T = static_cast<double>(features.num_segments());
  ModelParams g = ModelParams::zeros(s);
  const PoolingInputs& pin = fc.pooling;
  const PooledPredictions& pooled = fc.pooled;

  // Modality attention and the union.
  const Vector& wa = pooled.audio_weight;
  Vector d_audio = d_loss.video_audio + (wa.array() * d_loss.video_union.array()).matrix();
  Vector d_visual = d_loss.video_visual +
                    ((1.0 - wa.array()) * d_loss.video_union.array()).matrix();
  const Vector d_wa = (d_loss.video_union.array() *
                       (pooled.audio.array() - pooled.visual.array())).matrix();
  const Vector d_za = (d_wa.array() * wa.array() * (1.0 - wa.array())).matrix();
  const Vector d_zv = -d_za;

  const Eigen::RowVectorXd mean_a = fc.fused_audio.colwise().mean();
  const Eigen::RowVectorXd mean_v = fc.fused_visual.colwise().mean();
  g.modality_att_w = mean_a.transpose() * d_za.transpose() +
                     mean_v.transpose() * d_zv.transpose();
  g.modality_att_b = (d_za + d_zv).transpose();

  Matrix d_fused_a = Matrix::Zero(fc.fused_audio.rows(), s.d_model);
  Matrix d_fused_v = Matrix::Zero(fc.fused_visual.rows(), s.d_model);
  d_fused_a.rowwise() += (params.modality_att_w * d_za).transpose() / T;
  d_fused_v.rowwise() += (params.modality_att_w * d_zv).transpose() / T;

  // Temporal attention pooling.
  Matrix d_prob_a, d_tl_a, d_prob_v, d_tl_v;
  temporal_pool_backward(pooled.temporal_weights_audio, pin.prob_audio, d_audio,
                         d_prob_a, d_tl_a);
  temporal_pool_backward(pooled.temporal_weights_visual, pin.prob_visual, d_visual,
                         d_prob_v, d_tl_v);
  d_prob_v += d_loss.segment_visual;

  g.temporal_att_w = fc.fused_audio.transpose() * d_tl_a +
                     fc.fused_visual.transpose() * d_tl_v;
  g.temporal_att_b = d_tl_a.colwise().sum() + d_tl_v.colwise().sum();
  d_fused_a.noalias() += d_tl_a * params.temporal_att_w.transpose();
  d_fused_v.noalias() += d_tl_v * params.temporal_att_w.transpose();

  // Sigmoid classifier.
  const Matrix d_logit_a =
      (d_prob_a.array() * pin.prob_audio.array() * (1.0 - pin.prob_audio.array())).matrix();
  const Matrix d_logit_v =
      (d_prob_v.array() * pin.prob_visual.array() * (1.0 - pin.prob_visual.array())).matrix();
  g.classifier_w = fc.fused_audio.transpose() * d_logit_a +
                   fc.fused_visual.transpose() * d_logit_v;
  g.classifier_b = d_logit_a.colwise().sum() + d_logit_v.colwise().sum();
  d_fused_a.noalias() += d_logit_a * params.classifier_w.transpose();
  d_fused_v.noalias() += d_logit_v * params.classifier_w.transpose();

  // Residual hybrid attention.
  const Matrix& fa = fc.proj_audio;
  const Matrix& fv = fc.proj_visual;
  Matrix d_fa = d_fused_a;
  Matrix d_fv = d_fused_v;
  attention_backward(params.self_audio, fa, fa, s.heads, fc.self_audio, d_fused_a,
                     g.self_audio, d_fa, d_fa);
  attention_backward(params.cross_audio, fa, fv, s.heads, fc.cross_audio, d_fused_a,
                     g.cross_audio, d_fa, d_fv);
  attention_backward(params.self_visual, fv, fv, s.heads, fc.self_visual, d_fused_v,
                     g.self_visual, d_fv, d_fv);
  attention_backward(params.cross_visual, fv, fa, s.heads, fc.cross_visual, d_fused_v,
                     g.cross_visual, d_fv, d_fa);

  g.proj_audio_w = features.audio.transpose() * d_fa;
  g.proj_audio_b = d_fa.colwise().sum();
  g.proj_visual_w = features.visual.transpose() * d_fv;
  g.proj_visual_b = d_fv.colwise().sum();
  return g;
}

VideoLoss video_loss_and_grad(const FeatureBundle& features,
                              const ModelParams& params,
                              const LossTargets& targets, const LossConfig& cfg) {
  ForwardCache cache;
  const PredictionSet preds = han_forward(features, params, &cache);
  LossInputs in{preds.visual, preds.video_union, preds.video_audio, preds.video_visual};
  VideoLoss out{loss_total(in, targets, cfg), ModelParams{}};
  out.grad = han_backward(features, params, cache, out.loss.grad);
  return out;
}

BinaryPrediction binarize(const PredictionSet& preds, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("binarize: threshold must lie in (0,1)");
  auto cut = [threshold](const Matrix& m) {
    return m.unaryExpr([threshold](double v) { return v >= threshold ? 1 : 0; }).eval();
  };
  return {cut(preds.audio), cut(preds.visual), cut(preds.audio_visual)};
}

}  // namespace avvp
