// src/richness_loss.cpp

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

#include "avvp/richness_loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "avvp/plg.hpp"

namespace avvp {

void LossConfig::check() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("LossConfig: lambda must be a finite value >= 0");
  if (!(clamp_eps > 0.0 && clamp_eps < 1e-3))
    throw std::invalid_argument("LossConfig: clamp_eps must lie in (0, 1e-3)");
}

namespace {

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "bce: " << what << " = " << x << " outside [0,1]";
    throw std::invalid_argument(os.str());
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape " << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols();
    throw std::invalid_argument(os.str());
  }
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double bce(double p, double y, double clamp_eps) {
  check_unit(p, "p");
  check_unit(y, "y");
  const double lp = std::log(std::max(p, clamp_eps));
  const double lq = std::log(std::max(1.0 - p, clamp_eps));
  return -(y * lp + (1.0 - y) * lq);
}

double bce_grad(double p, double y, double clamp_eps) {
  check_unit(p, "p");
  check_unit(y, "y");
  double g = 0.0;
  if (p > clamp_eps) g -= y / p;
  if (1.0 - p > clamp_eps) g += (1.0 - y) / (1.0 - p);
  return g;
}

Matrix bce_elementwise(const Matrix& p, const Matrix& y, double clamp_eps) {
  check_same_shape(p, y, "bce_elementwise");
  Matrix out(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      out(r, c) = bce(p(r, c), y(r, c), clamp_eps);
  return out;
}

double bce_mean(const Matrix& p, const Matrix& y, double clamp_eps) {
  check_same_shape(p, y, "bce_mean");
  if (p.size() == 0) throw std::invalid_argument("bce_mean: empty input");
  return bce_elementwise(p, y, clamp_eps).sum() / static_cast<double>(p.size());
}

Vector category_richness(const Matrix& m, const LabelSet& labels) {
  const int n = labels.num_positive();
  if (n == 0)
    throw std::invalid_argument(
        "category_richness: video label has no categories");
  if (m.cols() != labels.num_classes()) {
    std::ostringstream os;
    os << "category_richness: matrix has " << m.cols() << " columns, labels have "
       << labels.num_classes();
    throw std::invalid_argument(os.str());
  }
  return m.rowwise().sum() / static_cast<double>(n);
}

Vector segment_richness(const Matrix& m) {
  if (m.rows() < 1) throw std::invalid_argument("segment_richness: T must be >= 1");
  return m.colwise().mean().transpose();
}

LossTargets make_loss_targets(const LabelSet& labels,
                              const PseudoLabelMatrix& pseudo,
                              double smoothing_eps) {
  const auto violations = validate(labels, pseudo);
  if (!violations.empty())
    throw ViolationError("pseudo label does not match its label set", violations);
  LossTargets t;
  t.union_label = labels.video_label().cast<double>();
  t.audio_smoothed = smooth_video_labels(labels, smoothing_eps).second;
  t.visual_video = derive_video_label(pseudo).cast<double>();
  t.visual_segments = pseudo.values().cast<double>();
  t.category_richness = category_richness(t.visual_segments, labels);
  t.segment_richness = segment_richness(t.visual_segments);
  t.num_positive = labels.num_positive();
  return t;
}

double loss_video(const Vector& p_union, const Vector& p_audio,
                  const Vector& p_visual, const Vector& y_union,
                  const Vector& y_audio_smoothed, const Vector& y_visual_plg,
                  double clamp_eps) {
  const Eigen::Index c = y_union.size();
  if (p_union.size() != c || p_audio.size() != c || p_visual.size() != c ||
      y_audio_smoothed.size() != c || y_visual_plg.size() != c)
    throw std::invalid_argument("loss_video: all vectors must have length C");
  return bce_mean(p_union, y_union, clamp_eps) +
         bce_mean(p_audio, y_audio_smoothed, clamp_eps) +
         bce_mean(p_visual, y_visual_plg, clamp_eps);
}

double loss_richness(const Matrix& segment_visual,
                     const PseudoLabelMatrix& pseudo, const LabelSet& labels,
                     double clamp_eps) {
  const Matrix target = pseudo.values().cast<double>();
  check_same_shape(segment_visual, target, "loss_richness");
  const Vector cr = category_richness(target, labels);
  const Vector sr = segment_richness(target);
  const Vector pcr = category_richness(segment_visual, labels).unaryExpr(&clamp_unit);
  const Vector psr = segment_richness(segment_visual).unaryExpr(&clamp_unit);
  return bce_mean(pcr, cr, clamp_eps) + bce_mean(psr, sr, clamp_eps);
}

namespace {

// Adds the gradient of mean bce(p, y) to `out`, returns the mean loss.
double mean_bce_accumulate(const Vector& p, const Vector& y, double eps,
                           Vector& out) {
  const double n = static_cast<double>(p.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    sum += bce(p(i), y(i), eps);
    out(i) += bce_grad(p(i), y(i), eps) / n;
  }
  return sum / n;
}

}  // namespace

LossResult loss_total(const LossInputs& preds, const LossTargets& targets,
                      const LossConfig& cfg) {
  cfg.check();
  const Eigen::Index T = targets.visual_segments.rows();
  const Eigen::Index C = targets.visual_segments.cols();
  check_same_shape(preds.segment_visual, targets.visual_segments, "loss_total");
  if (preds.video_union.size() != C || preds.video_audio.size() != C ||
      preds.video_visual.size() != C)
    throw std::invalid_argument("loss_total: video-level vectors must have length C");
  if (targets.num_positive < 1)
    throw std::invalid_argument("loss_total: video label has no categories");

  const double eps = cfg.clamp_eps;
  LossResult r;
  r.grad.segment_visual = Matrix::Zero(T, C);
  r.grad.video_union = Vector::Zero(C);
  r.grad.video_audio = Vector::Zero(C);
  r.grad.video_visual = Vector::Zero(C);

  r.video = mean_bce_accumulate(preds.video_union, targets.union_label, eps,
                                r.grad.video_union) +
            mean_bce_accumulate(preds.video_audio, targets.audio_smoothed, eps,
                                r.grad.video_audio) +
            mean_bce_accumulate(preds.video_visual, targets.visual_video, eps,
                                r.grad.video_visual);

  // Richness term. Both ratios are linear in the prediction matrix, so the
  // chain rule only needs the per-ratio bce derivative.
  const double npos = static_cast<double>(targets.num_positive);
  const Vector pcr_raw = preds.segment_visual.rowwise().sum() / npos;
  const Vector psr = preds.segment_visual.colwise().mean().transpose();

  double cr_loss = 0.0;
  Vector d_pcr = Vector::Zero(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double p = clamp_unit(pcr_raw(t));
    cr_loss += bce(p, targets.category_richness(t), eps);
    if (pcr_raw(t) <= 1.0)
      d_pcr(t) = bce_grad(p, targets.category_richness(t), eps) / double(T);
  }
  cr_loss /= double(T);

  Vector d_psr = Vector::Zero(C);
  const double sr_loss =
      mean_bce_accumulate(psr, targets.segment_richness, eps, d_psr);
  r.richness = cr_loss + sr_loss;

  if (cfg.lambda != 0.0) {
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index t = 0; t < T; ++t)
        r.grad.segment_visual(t, c) =
            cfg.lambda * (d_pcr(t) / npos + d_psr(c) / double(T));
  }
  r.total = r.video + cfg.lambda * r.richness;
  return r;
}

}  // namespace avvp
