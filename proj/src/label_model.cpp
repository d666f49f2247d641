// src/label_model.cpp

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

#include "avvp/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace avvp {

LabelSet::LabelSet(std::vector<std::string> categories,
                   BinaryVector video_label, int num_segments)
    : categories_(std::move(categories)),
      video_label_(std::move(video_label)),
      num_segments_(num_segments) {
  if (categories_.empty())
    throw std::invalid_argument("LabelSet: at least one category required");
  if (static_cast<Eigen::Index>(categories_.size()) != video_label_.size()) {
    std::ostringstream os;
    os << "LabelSet: " << categories_.size() << " categories but video label of length "
       << video_label_.size();
    throw std::invalid_argument(os.str());
  }
  if (num_segments_ < 1)
    throw std::invalid_argument("LabelSet: T must be >= 1");
  std::set<std::string> seen;
  for (const auto& name : categories_) {
    if (name.empty())
      throw std::invalid_argument("LabelSet: empty category name");
    if (!seen.insert(name).second)
      throw std::invalid_argument("LabelSet: duplicate category '" + name + "'");
  }
  for (Eigen::Index c = 0; c < video_label_.size(); ++c) {
    if (video_label_(c) != 0 && video_label_(c) != 1) {
      std::ostringstream os;
      os << "LabelSet: video_label[" << c << "] = " << video_label_(c)
         << " is not binary";
      throw std::invalid_argument(os.str());
    }
  }
}

const char* stage_name(LabelStage stage) {
  switch (stage) {
    case LabelStage::kPlg: return "plg";
    case LabelStage::kPld: return "pld";
  }
  return "unknown";
}

const char* violation_kind_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kDimension: return "dimension";
    case Violation::Kind::kDomain: return "domain";
    case Violation::Kind::kColumnConsistency: return "column-consistency";
    case Violation::Kind::kRowSum: return "row-sum";
    case Violation::Kind::kRange: return "range";
  }
  return "unknown";
}

SimilarityMatrix::SimilarityMatrix(Matrix values) : values_(std::move(values)) {
  for (Eigen::Index t = 0; t < values_.rows(); ++t) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      const double v = values_(t, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "similarity entry (" << t << "," << c << ") = " << v
           << " outside [0,1]";
        throw std::invalid_argument(os.str());
      }
    }
    const double sum = values_.row(t).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os << "similarity row " << t << " sums to " << sum;
      throw std::invalid_argument(os.str());
    }
  }
}

BinaryVector derive_video_label(const PseudoLabelMatrix& pseudo) {
  BinaryVector out = BinaryVector::Zero(pseudo.cols());
  for (int c = 0; c < pseudo.cols(); ++c)
    out(c) = (pseudo.values().col(c).array() > 0).any() ? 1 : 0;
  return out;
}

std::vector<Violation> validate(const LabelSet& labels,
                                const PseudoLabelMatrix& pseudo) {
  std::vector<Violation> out;
  if (pseudo.cols() != labels.num_classes()) {
    std::ostringstream os;
    os << "pseudo label has " << pseudo.cols() << " columns, label set has "
       << labels.num_classes() << " categories";
    out.push_back({Violation::Kind::kDimension, -1, -1, os.str()});
  }
  if (pseudo.rows() != labels.num_segments()) {
    std::ostringstream os;
    os << "pseudo label has " << pseudo.rows() << " rows, label set has T = "
       << labels.num_segments();
    out.push_back({Violation::Kind::kDimension, -1, -1, os.str()});
  }
  const BinaryMatrix& v = pseudo.values();
  for (int t = 0; t < pseudo.rows(); ++t) {
    for (int c = 0; c < pseudo.cols(); ++c) {
      if (v(t, c) != 0 && v(t, c) != 1) {
        std::ostringstream os;
        os << "entry (" << t << "," << c << ") = " << v(t, c) << " is not binary";
        out.push_back({Violation::Kind::kDomain, t, c, os.str()});
      }
    }
  }
  const int shared_cols = std::min(pseudo.cols(), labels.num_classes());
  for (int c = 0; c < shared_cols; ++c) {
    if (labels.video_label()(c) != 0) continue;
    for (int t = 0; t < pseudo.rows(); ++t) {
      if (v(t, c) != 0) {
        out.push_back({Violation::Kind::kColumnConsistency, t, c,
                       "category '" + labels.categories()[c] +
                           "' is absent from the video label but marked in "
                           "segment " + std::to_string(t)});
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const LabelSet& labels,
                                const Matrix& similarity) {
  std::vector<Violation> out;
  if (similarity.cols() != labels.num_classes() ||
      similarity.rows() != labels.num_segments()) {
    std::ostringstream os;
    os << "similarity is " << similarity.rows() << "x" << similarity.cols()
       << ", expected " << labels.num_segments() << "x" << labels.num_classes();
    out.push_back({Violation::Kind::kDimension, -1, -1, os.str()});
  }
  for (Eigen::Index t = 0; t < similarity.rows(); ++t) {
    for (Eigen::Index c = 0; c < similarity.cols(); ++c) {
      const double x = similarity(t, c);
      if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream os;
        os << "similarity (" << t << "," << c << ") = " << x << " outside [0,1]";
        out.push_back({Violation::Kind::kRange, static_cast<int>(t),
                       static_cast<int>(c), os.str()});
      }
    }
    const double sum = similarity.row(t).sum();
    if (!(std::abs(sum - 1.0) <= SimilarityMatrix::kRowSumTolerance)) {
      std::ostringstream os;
      os << "similarity row " << t << " sums to " << sum;
      out.push_back({Violation::Kind::kRowSum, static_cast<int>(t), -1, os.str()});
    }
  }
  return out;
}

}  // namespace avvp
