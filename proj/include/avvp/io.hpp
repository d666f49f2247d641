// avvp/io.hpp

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

#ifndef AVVP_IO_HPP_
#define AVVP_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "avvp/label_model.hpp"
#include "avvp/parser_net.hpp"

namespace avvp::io {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

/// Raised for unreadable, missing or malformed files. The message names the
/// path.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// Lower-case hex SHA-256 of the file's bytes.
std::string sha256_file(const fs::path& path);

// --- CSV -------------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string_view line);
std::string join_csv_line(const std::vector<std::string>& fields);

/// Headerless numeric matrix (feature files).
Matrix read_matrix_csv(const fs::path& path);
std::string format_matrix_csv(const Matrix& m);

/// Header row of category names, then T numeric rows. The header must equal
/// `categories` exactly.
Matrix read_scores_csv(const fs::path& path, const std::vector<std::string>& categories);
std::string format_scores_csv(const Matrix& m, const std::vector<std::string>& categories);

/// Header row of category names, then T integer rows. Entries are parsed as
/// integers without a domain check so validate() can report them.
BinaryMatrix read_label_csv(const fs::path& path,
                            const std::vector<std::string>& categories);
std::string format_label_csv(const BinaryMatrix& m,
                             const std::vector<std::string>& categories);

// --- manifest --------------------------------------------------------------

struct Manifest {
  int schema_version = kSchemaVersion;
  std::string video_id;
  int T = 0;
  std::vector<std::string> categories;
  std::vector<int> video_label;

  LabelSet label_set() const;
};

Manifest read_manifest(const fs::path& path);
std::string format_manifest(const Manifest& m);

// --- dataset layout --------------------------------------------------------

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kAudioFile = "audio.csv";
inline constexpr const char* kVisualFile = "visual.csv";
inline constexpr const char* kSimilarityFile = "clip_sim.csv";
inline constexpr const char* kImageFeatureFile = "image_features.csv";
inline constexpr const char* kTextFeatureFile = "text_features.csv";
inline constexpr const char* kPlgFile = "plg.csv";
inline constexpr const char* kPldFile = "pld.csv";
inline constexpr const char* kGtAudioFile = "gt_audio.csv";
inline constexpr const char* kGtVisualFile = "gt_visual.csv";

struct VideoEntry {
  std::string id;
  fs::path dir;
  Manifest manifest;
};

/// Every sub-directory of `root` holding a manifest, sorted by directory
/// name. Throws when categories differ between videos.
std::vector<VideoEntry> list_videos(const fs::path& root);

FeatureBundle read_features(const VideoEntry& v);
PseudoLabelMatrix read_pseudo_labels(const VideoEntry& v, LabelStage stage);

// --- checkpoint ------------------------------------------------------------

/// Text container:
///   avvp-checkpoint 1
///   shape <audio_dim> <visual_dim> <d_model> <heads> <classes>
///   categories <C>            followed by C lines, one name each
///   block <name> <rows> <cols> followed by <rows> lines of <cols> values
///   end
/// Blocks appear in ModelParams::for_each_block order; values are written in
/// shortest round-trip form, so a reload is bit-exact.
std::string format_checkpoint(const ModelParams& params,
                              const std::vector<std::string>& categories);
void save_checkpoint(const fs::path& path, const ModelParams& params,
                     const std::vector<std::string>& categories);

struct Checkpoint {
  ModelParams params;
  std::vector<std::string> categories;
};

Checkpoint load_checkpoint(const fs::path& path);

}  // namespace avvp::io

#endif  // AVVP_IO_HPP_
