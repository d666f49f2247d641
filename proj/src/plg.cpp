// src/plg.cpp

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

#include "avvp/plg.hpp"

#include <sstream>
#include <stdexcept>

namespace avvp {

void PlgConfig::check() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream os;
    os << "PlgConfig: tau = " << tau << " must lie in (0,1)";
    throw std::invalid_argument(os.str());
  }
}

namespace {

Matrix row_normalized(const Matrix& m, const char* what) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double norm = m.row(r).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::ostringstream os;
      os << what << " row " << r << " has zero or non-finite norm";
      throw std::invalid_argument(os.str());
    }
    out.row(r) = m.row(r) / norm;
  }
  return out;
}

}  // namespace

SimilarityMatrix similarity_from_features(const FeaturePair& features) {
  const Matrix& img = features.image_features;
  const Matrix& txt = features.text_features;
  if (img.cols() < 1 || img.cols() != txt.cols()) {
    std::ostringstream os;
    os << "feature dimension mismatch: image d = " << img.cols()
       << ", text d = " << txt.cols();
    throw std::invalid_argument(os.str());
  }
  if (txt.rows() < 2)
    throw std::invalid_argument("similarity_from_features needs C >= 2 categories");

  const Matrix cosine =
      row_normalized(img, "image feature") *
      row_normalized(txt, "text feature").transpose();
  Matrix out(cosine.rows(), cosine.cols());
  for (Eigen::Index t = 0; t < cosine.rows(); ++t) {
    const double peak = cosine.row(t).maxCoeff();
    const Eigen::RowVectorXd e = (cosine.row(t).array() - peak).exp().matrix();
    out.row(t) = e / e.sum();
  }
  return SimilarityMatrix(std::move(out));
}

PseudoLabelMatrix generate_pseudo_labels(const SimilarityMatrix& sim,
                                         const LabelSet& labels,
                                         const PlgConfig& cfg) {
  cfg.check();
  if (sim.rows() != labels.num_segments() || sim.cols() != labels.num_classes()) {
    std::ostringstream os;
    os << "similarity is " << sim.rows() << "x" << sim.cols()
       << " but labels expect " << labels.num_segments() << "x"
       << labels.num_classes();
    throw std::invalid_argument(os.str());
  }
  BinaryMatrix out = BinaryMatrix::Zero(sim.rows(), sim.cols());
  for (int t = 0; t < sim.rows(); ++t) {
    for (int c = 0; c < sim.cols(); ++c) {
      // ties at the threshold count as selected
      const int mask = (sim.values()(t, c) - cfg.tau >= 0.0) ? 1 : 0;
      out(t, c) = mask * labels.video_label()(c);
    }
  }
  return PseudoLabelMatrix(std::move(out), LabelStage::kPlg);
}

std::pair<Vector, Vector> smooth_video_labels(const LabelSet& labels,
                                              double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    std::ostringstream os;
    os << "label smoothing epsilon = " << epsilon << " must lie in [0, 0.5)";
    throw std::invalid_argument(os.str());
  }
  const Vector y = labels.video_label().cast<double>();
  const Vector smoothed =
      ((1.0 - epsilon) * y.array() + epsilon * (1.0 - y.array())).matrix();
  return {smoothed, smoothed};
}

}  // namespace avvp
