/* Copyright 2026 The dimkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dim/core/serialize.hpp"

namespace dim {

// Writes `contents` to a sibling temp file and renames it over `path`, so
// readers observe either the old file or the new one.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Streams a JSON-lines file. Blank lines are skipped; errors name the line.
class JsonlReader {
 public:
  explicit JsonlReader(const std::filesystem::path& path);

  // Returns false at end of file.
  bool next(Json& out);
  std::size_t line_number() const { return line_no_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

template <typename T>
void for_each_line(const std::filesystem::path& path, const std::function<void(T)>& fn) {
  JsonlReader reader(path);
  Json j;
  while (reader.next(j)) {
    try {
      check_schema_version(j);
      fn(decode<T>(j));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what());
    }
  }
}

template <typename T>
std::vector<T> read_lines(const std::filesystem::path& path) {
  std::vector<T> out;
  for_each_line<T>(path, [&](T v) { out.push_back(std::move(v)); });
  return out;
}

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& items) {
  std::string buf;
  for (const auto& item : items) {
    buf += to_line(item);
    buf += '\n';
  }
  atomic_write_file(path, buf);
}

void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& lines);

}  // namespace dim
