// avvp/label_model.hpp

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

#ifndef AVVP_LABEL_MODEL_HPP_
#define AVVP_LABEL_MODEL_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace avvp {

// Dense storage throughout: T is tens of segments, C at most a few hundred.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::MatrixXi;
using BinaryVector = Eigen::VectorXi;

/// Weak video-level supervision: which of the C categories occur anywhere in
/// the video (audio or visual), plus the category vocabulary and the number of
/// temporal segments T.
class LabelSet {
 public:
  /// Throws std::invalid_argument when any invariant fails.
  LabelSet(std::vector<std::string> categories, BinaryVector video_label,
           int num_segments);

  const std::vector<std::string>& categories() const { return categories_; }
  const BinaryVector& video_label() const { return video_label_; }
  int num_classes() const { return static_cast<int>(categories_.size()); }
  int num_segments() const { return num_segments_; }
  /// Number of categories present in the video.
  int num_positive() const { return video_label_.sum(); }

 private:
  std::vector<std::string> categories_;
  BinaryVector video_label_;
  int num_segments_;
};

enum class LabelStage { kPlg, kPld };

const char* stage_name(LabelStage stage);

/// Segment-level visual pseudo labels, T x C.
///
/// Construction does not check the binary domain or column consistency;
/// matrices read from disk go through validate() so that every violation can
/// be reported with coordinates instead of failing on the first one.
class PseudoLabelMatrix {
 public:
  PseudoLabelMatrix(BinaryMatrix values, LabelStage stage)
      : values_(std::move(values)), stage_(stage) {}

  const BinaryMatrix& values() const { return values_; }
  LabelStage stage() const { return stage_; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

 private:
  BinaryMatrix values_;
  LabelStage stage_;
};

/// Row-stochastic segment-to-category similarity scores.
class SimilarityMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-6;

  /// Throws std::invalid_argument naming the first bad row.
  explicit SimilarityMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

 private:
  Matrix values_;
};

struct Violation {
  enum class Kind { kDimension, kDomain, kColumnConsistency, kRowSum, kRange };
  Kind kind;
  int row = -1;  // -1 when the violation is not tied to a row
  int col = -1;
  std::string message;
};

const char* violation_kind_name(Violation::Kind kind);

/// A category is present at video level iff some segment carries it.
BinaryVector derive_video_label(const PseudoLabelMatrix& pseudo);

/// Every invariant violation of `pseudo` against `labels`; empty means ok.
std::vector<Violation> validate(const LabelSet& labels,
                                const PseudoLabelMatrix& pseudo);

/// Shape, range and row-sum checks for raw similarity scores.
std::vector<Violation> validate(const LabelSet& labels,
                                const Matrix& similarity);

/// Carries a violation list out of code paths that cannot continue.
class ViolationError : public std::runtime_error {
 public:
  ViolationError(const std::string& what, std::vector<Violation> violations)
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace avvp

#endif  // AVVP_LABEL_MODEL_HPP_
