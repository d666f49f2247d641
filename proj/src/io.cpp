// src/io.cpp

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

#include "avvp/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace avvp::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw FileError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw FileError("cannot rename " + tmp.string() + " to " + path.string() +
                          ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("missing or unreadable file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw FileError("sha256 failed for " + path.string());
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// --- CSV -------------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string join_csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out += f;
    } else {
      out.push_back('"');
      for (char ch : f) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
      }
      out.push_back('"');
    }
  }
  return out;
}

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void bad_cell(const fs::path& path, std::size_t line, std::size_t col,
                           const std::string& text) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": column " << col + 1 << ": cannot parse '"
     << text << "'";
  throw FileError(os.str());
}

template <typename T>
T parse_number(const std::string& text, const fs::path& path, std::size_t line,
               std::size_t col) {
  std::string_view s(text);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    bad_cell(path, line, col, text);
  return value;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> parse_rows(
    const std::vector<std::string>& lines, std::size_t first, const fs::path& path,
    std::size_t expected_cols) {
  const std::size_t rows = lines.size() - first;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m(rows, expected_cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto fields = split_csv_line(lines[first + r]);
    if (fields.size() != expected_cols) {
      std::ostringstream os;
      os << path.string() << ":" << first + r + 1 << ": expected " << expected_cols
         << " columns, found " << fields.size();
      throw FileError(os.str());
    }
    for (std::size_t c = 0; c < expected_cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number<T>(fields[c], path, first + r + 1, c);
  }
  return m;
}

void check_header(const std::vector<std::string>& lines, const fs::path& path,
                  const std::vector<std::string>& categories) {
  if (lines.empty()) throw FileError(path.string() + ": empty file, header expected");
  const auto header = split_csv_line(lines.front());
  if (header != categories) {
    std::ostringstream os;
    os << path.string() << ": header does not match the manifest categories";
    for (std::size_t i = 0; i < std::max(header.size(), categories.size()); ++i) {
      const std::string a = i < header.size() ? header[i] : "<missing>";
      const std::string b = i < categories.size() ? categories[i] : "<missing>";
      if (a != b) {
        os << " (column " << i + 1 << ": '" << a << "' vs '" << b << "')";
        break;
      }
    }
    throw FileError(os.str());
  }
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FileError(path.string() + ": no rows");
  const std::size_t cols = split_csv_line(lines.front()).size();
  return parse_rows<double>(lines, 0, path, cols);
}

std::string format_matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_double(m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

Matrix read_scores_csv(const fs::path& path, const std::vector<std::string>& categories) {
  const auto lines = read_lines(path);
  check_header(lines, path, categories);
  return parse_rows<double>(lines, 1, path, categories.size());
}

std::string format_scores_csv(const Matrix& m, const std::vector<std::string>& categories) {
  return join_csv_line(categories) + "\n" + format_matrix_csv(m);
}

BinaryMatrix read_label_csv(const fs::path& path,
                            const std::vector<std::string>& categories) {
  const auto lines = read_lines(path);
  check_header(lines, path, categories);
  return parse_rows<int>(lines, 1, path, categories.size());
}

std::string format_label_csv(const BinaryMatrix& m,
                             const std::vector<std::string>& categories) {
  std::string out = join_csv_line(categories) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += std::to_string(m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

// --- manifest --------------------------------------------------------------

LabelSet Manifest::label_set() const {
  BinaryVector y(static_cast<Eigen::Index>(video_label.size()));
  for (std::size_t i = 0; i < video_label.size(); ++i)
    y(static_cast<Eigen::Index>(i)) = video_label[i];
  return LabelSet(categories, std::move(y), T);
}

Manifest read_manifest(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FileError(path.string() + ": invalid JSON: " + e.what());
  }
  static const std::set<std::string> kKeys = {"schema_version", "video_id", "T",
                                              "categories", "video_label"};
  if (!j.is_object()) throw FileError(path.string() + ": manifest must be an object");
  for (const auto& key : kKeys)
    if (!j.contains(key)) throw FileError(path.string() + ": missing key '" + key + "'");
  for (const auto& item : j.items())
    if (!kKeys.count(item.key()))
      throw FileError(path.string() + ": unexpected key '" + item.key() + "'");
  Manifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    m.video_id = j.at("video_id").get<std::string>();
    m.T = j.at("T").get<int>();
    m.categories = j.at("categories").get<std::vector<std::string>>();
    m.video_label = j.at("video_label").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FileError(path.string() + ": " + e.what());
  }
  if (m.schema_version != kSchemaVersion)
    throw FileError(path.string() + ": unsupported schema_version " +
                    std::to_string(m.schema_version));
  try {
    (void)m.label_set();
  } catch (const std::invalid_argument& e) {
    throw FileError(path.string() + ": " + e.what());
  }
  return m;
}

std::string format_manifest(const Manifest& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = m.schema_version;
  j["video_id"] = m.video_id;
  j["T"] = m.T;
  j["categories"] = m.categories;
  j["video_label"] = m.video_label;
  return j.dump(2) + "\n";
}

// --- dataset layout --------------------------------------------------------

std::vector<VideoEntry> list_videos(const fs::path& root) {
  if (!fs::is_directory(root))
    throw FileError("dataset root is not a directory: " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / kManifestFile)) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty())
    throw FileError("no video directories with a manifest under " + root.string());
  std::vector<VideoEntry> out;
  for (const auto& d : dirs) {
    Manifest m = read_manifest(d / kManifestFile);
    if (!out.empty() && m.categories != out.front().manifest.categories)
      throw FileError((d / kManifestFile).string() +
                      ": category list differs from " +
                      (out.front().dir / kManifestFile).string());
    out.push_back({d.filename().string(), d, std::move(m)});
  }
  return out;
}

FeatureBundle read_features(const VideoEntry& v) {
  FeatureBundle fb{read_matrix_csv(v.dir / kAudioFile), read_matrix_csv(v.dir / kVisualFile)};
  if (fb.audio.rows() != v.manifest.T || fb.visual.rows() != v.manifest.T) {
    std::ostringstream os;
    os << v.dir.string() << ": feature files have " << fb.audio.rows() << "/"
       << fb.visual.rows() << " rows, manifest T = " << v.manifest.T;
    throw FileError(os.str());
  }
  return fb;
}

PseudoLabelMatrix read_pseudo_labels(const VideoEntry& v, LabelStage stage) {
  const fs::path p = v.dir / (stage == LabelStage::kPlg ? kPlgFile : kPldFile);
  return PseudoLabelMatrix(read_label_csv(p, v.manifest.categories), stage);
}

// --- checkpoint ------------------------------------------------------------

std::string format_checkpoint(const ModelParams& params,
                              const std::vector<std::string>& categories) {
  const ModelShape& s = params.shape;
  std::ostringstream os;
  os << "avvp-checkpoint 1\n";
  os << "shape " << s.audio_dim << ' ' << s.visual_dim << ' ' << s.d_model << ' '
     << s.heads << ' ' << s.classes << '\n';
  os << "categories " << categories.size() << '\n';
  for (const auto& c : categories) os << c << '\n';
  params.for_each_block([&](const std::string& name, const Matrix& m) {
    os << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) os << ' ';
        os << format_double(m(r, c));
      }
      os << '\n';
    }
  });
  os << "end\n";
  return os.str();
}

void save_checkpoint(const fs::path& path, const ModelParams& params,
                     const std::vector<std::string>& categories) {
  write_file_atomic(path, format_checkpoint(params, categories));
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::istringstream in(read_file(path));
  auto fail = [&](const std::string& why) -> FileError {
    return FileError(path.string() + ": malformed checkpoint: " + why);
  };
  std::string line, word;
  if (!std::getline(in, line) || line != "avvp-checkpoint 1")
    throw fail("bad magic line");
  ModelShape shape;
  if (!(in >> word >> shape.audio_dim >> shape.visual_dim >> shape.d_model >>
        shape.heads >> shape.classes) ||
      word != "shape")
    throw fail("bad shape line");
  std::size_t n = 0;
  if (!(in >> word >> n) || word != "categories") throw fail("bad categories line");
  std::getline(in, line);
  Checkpoint ck;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw fail("truncated category list");
    ck.categories.push_back(line);
  }
  try {
    ck.params = ModelParams::zeros(shape);
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  ck.params.for_each_block([&](const std::string& name, Matrix& m) {
    std::string got;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> word >> got >> rows >> cols) || word != "block" || got != name)
      throw fail("expected block " + name);
    if (rows != m.rows() || cols != m.cols()) throw fail("block " + name + " has wrong shape");
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> word)) throw fail("truncated block " + name);
        double v = 0.0;
        const auto res = std::from_chars(word.data(), word.data() + word.size(), v);
        if (res.ec != std::errc() || res.ptr != word.data() + word.size())
          throw fail("bad value '" + word + "' in block " + name);
        m(r, c) = v;
      }
    }
  });
  if (!(in >> word) || word != "end") throw fail("missing end marker");
  if (static_cast<int>(ck.categories.size()) != shape.classes)
    throw fail("category count differs from the class count");
  return ck;
}

}  // namespace avvp::io
