// tests/support/fixtures.hpp

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

#ifndef AVVP_TESTS_FIXTURES_HPP_
#define AVVP_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "avvp/label_model.hpp"
#include "avvp/rng.hpp"

namespace avvp::testing {

inline BinaryMatrix binary(std::initializer_list<std::initializer_list<int>> rows) {
  BinaryMatrix m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (auto row : rows) {
    Eigen::Index c = 0;
    for (int v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline std::vector<std::string> names(int C) {
  std::vector<std::string> out;
  for (int c = 0; c < C; ++c) out.push_back("c" + std::to_string(c));
  return out;
}

inline LabelSet label_set_of(const BinaryMatrix& pseudo) {
  BinaryVector y(pseudo.cols());
  for (Eigen::Index c = 0; c < pseudo.cols(); ++c) y(c) = pseudo.col(c).any() ? 1 : 0;
  return LabelSet(names(static_cast<int>(pseudo.cols())), y, static_cast<int>(pseudo.rows()));
}

// Pseudo label of the dog/rooster/speech illustration: dog in all four
// segments, rooster in the first two, speech only in the first.
inline BinaryMatrix three_event_example() {
  return binary({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}, {1, 0, 0}});
}

// Vacuum cleaner in the first four of five segments, speech in the fourth.
inline BinaryMatrix vacuum_speech_example() {
  return binary({{1, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 0}});
}

// Plain scalar BCE, written independently of the library.
inline double scalar_bce(double p, double y, double eps = 1e-7) {
  return -(y * std::log(std::max(p, eps)) + (1 - y) * std::log(std::max(1 - p, eps)));
}

inline Matrix random_probs(Rng& rng, int rows, int cols, double lo = 0.02, double hi = 0.98) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline BinaryMatrix random_binary(Rng& rng, int rows, int cols, double p) {
  BinaryMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform() < p ? 1 : 0;
  return m;
}

}  // namespace avvp::testing

#endif  // AVVP_TESTS_FIXTURES_HPP_
