// src/pld.cpp

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

#include "avvp/pld.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace avvp {

void PldConfig::check() const {
  if (k < 1) throw std::invalid_argument("PldConfig: k must be >= 1");
  if (!(alpha > 1.0)) throw std::invalid_argument("PldConfig: alpha must be > 1");
  if (!(clamp_eps > 0.0 && clamp_eps < 1e-3))
    throw std::invalid_argument("PldConfig: clamp_eps must lie in (0, 1e-3)");
}

Matrix loss_matrix(const Matrix& segment_visual, const PseudoLabelMatrix& pseudo,
                   double clamp_eps) {
  if (segment_visual.rows() != pseudo.rows() ||
      segment_visual.cols() != pseudo.cols()) {
    std::ostringstream os;
    os << "loss_matrix: predictions are " << segment_visual.rows() << "x"
       << segment_visual.cols() << ", pseudo label is " << pseudo.rows() << "x"
       << pseudo.cols();
    throw std::invalid_argument(os.str());
  }
  return bce_elementwise(segment_visual, pseudo.values().cast<double>(), clamp_eps);
}

Matrix mask_loss_matrix(const Matrix& losses, const BinaryVector& video_label) {
  if (losses.cols() != video_label.size())
    throw std::invalid_argument("mask_loss_matrix: column count != label length");
  Matrix out = losses;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    if (video_label(c) == 0) out.col(c).setZero();
  return out;
}

FlipMask flip_mask(const Matrix& masked_losses, const BinaryVector& video_label,
                   const PldConfig& cfg) {
  cfg.check();
  const Eigen::Index T = masked_losses.rows();
  if (cfg.k > T) {
    std::ostringstream os;
    os << "flip_mask: k = " << cfg.k << " exceeds T = " << T;
    throw std::invalid_argument(os.str());
  }
  if (masked_losses.cols() != video_label.size())
    throw std::invalid_argument("flip_mask: column count != label length");

  BinaryMatrix flips = BinaryMatrix::Zero(T, masked_losses.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
  for (Eigen::Index j = 0; j < masked_losses.cols(); ++j) {
    // Absent categories: the literal threshold would be 0 and flag everything.
    if (video_label(j) == 0) continue;
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return masked_losses(a, j) < masked_losses(b, j);
    });
    double sum = 0.0;
    for (int i = 0; i < cfg.k; ++i) sum += masked_losses(order[i], j);
    const double mu = cfg.alpha * (sum / cfg.k);
    // A zero-loss entry already agrees with its label; without this a column
    // whose k smallest losses are exactly zero would flag every entry.
    for (Eigen::Index t = 0; t < T; ++t) {
      const double loss = masked_losses(t, j);
      flips(t, j) = (loss - mu >= 0.0 && loss > 0.0) ? 1 : 0;
    }
  }
  return FlipMask(std::move(flips), video_label);
}

PseudoLabelMatrix denoise(const PseudoLabelMatrix& pseudo, const FlipMask& flips) {
  const BinaryMatrix& phi = flips.values();
  if (phi.rows() != pseudo.rows() || phi.cols() != pseudo.cols())
    throw std::invalid_argument("denoise: flip mask shape differs from pseudo label");
  const BinaryVector& present = flips.reference_label();
  if (present.size() != phi.cols())
    throw std::invalid_argument("denoise: reference label length != column count");
  BinaryMatrix out = pseudo.values();
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    for (Eigen::Index t = 0; t < phi.rows(); ++t) {
      if (phi(t, c) == 0) continue;
      if (present(c) == 0) {
        std::ostringstream os;
        os << "denoise: flip requested at (" << t << "," << c
           << ") in a category absent from the video-level visual label";
        throw std::invalid_argument(os.str());
      }
      out(t, c) = 1 - out(t, c);
    }
  }
  return PseudoLabelMatrix(std::move(out), LabelStage::kPld);
}

PseudoLabelMatrix denoise_with_predictions(const Matrix& segment_visual,
                                           const PseudoLabelMatrix& pseudo,
                                           const PldConfig& cfg) {
  const BinaryVector present = derive_video_label(pseudo);
  const Matrix masked = mask_loss_matrix(
      loss_matrix(segment_visual, pseudo, cfg.clamp_eps), present);
  return denoise(pseudo, flip_mask(masked, present, cfg));
}

}  // namespace avvp
