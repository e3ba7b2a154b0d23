// Copyright 2026 The Recomb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File plumbing: JSON-lines streams, atomic writes, SHA-256 digests.

#ifndef RECOMB_IO_HPP_
#define RECOMB_IO_HPP_

#include <openssl/evp.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "recomb/core.hpp"

namespace recomb {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_digest(const fs::path& path) { return sha256_hex(read_file(path)); }

// Writes to a sibling temp file and renames it into place, so readers never
// observe a partial file.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<unsigned long> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Canonical one-line JSON: sorted keys, no extra whitespace.
inline std::string canonical_dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

inline void write_jsonl(const fs::path& path, const std::vector<Json>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    buf += canonical_dump(r);
    buf.push_back('\n');
  }
  write_file_atomic(path, buf);
}

struct JsonlStats {
  size_t lines = 0;
  size_t malformed = 0;
};

// Streams a JSON-lines file. `on_row` receives (json, 1-based line number);
// returning false from it counts the line as malformed. Unparseable lines
// are counted and skipped when `skip_malformed`, otherwise they throw with
// the line number.
inline JsonlStats for_each_jsonl(const fs::path& path,
                                 const std::function<bool(const Json&, size_t)>& on_row,
                                 bool skip_malformed = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  JsonlStats stats;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++stats.lines;
    Json j = Json::parse(line, nullptr, false);
    bool ok = !j.is_discarded();
    if (ok) {
      try {
        ok = on_row(j, lineno);
      } catch (const std::exception& e) {
        if (!skip_malformed)
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        ok = false;
      }
    } else if (!skip_malformed) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON");
    }
    if (!ok) ++stats.malformed;
  }
  return stats;
}

inline std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> rows;
  for_each_jsonl(path, [&](const Json& j, size_t) {
    rows.push_back(j);
    return true;
  });
  return rows;
}

}  // namespace recomb

#endif  // RECOMB_IO_HPP_
