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

#include "dim/core/jsonl.hpp"

#include <atomic>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "dim/core/text.hpp"

namespace dim {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JsonlReader::JsonlReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open " + path.string());
}

bool JsonlReader::next(Json& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (text::trim(line).empty()) continue;
    try {
      out = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError(path_.string() + ":" + std::to_string(line_no_) + ": invalid JSON: " + e.what());
    }
    return true;
  }
  return false;
}

void write_json_lines(const fs::path& path, const std::vector<Json>& lines) {
  std::string buf;
  for (const auto& j : lines) {
    buf += j.dump();
    buf += '\n';
  }
  atomic_write_file(path, buf);
}

}  // namespace dim
