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

#include "dim/cli/log.hpp"

#include <cstdlib>
#include <cstring>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>

extern char** environ;

namespace dim::log {

std::vector<std::string> secrets_from_env() {
  std::vector<std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const auto name = entry.substr(0, eq);
    if (name.starts_with("DIM_") && name.ends_with("_API_KEY")) {
      const auto value = entry.substr(eq + 1);
      if (!value.empty()) out.emplace_back(value);
    }
  }
  return out;
}

std::string scrub(std::string_view text, const std::vector<std::string>& secrets) {
  std::string out(text);
  for (const auto& s : secrets) {
    if (s.size() < 4) continue;
    std::size_t pos = 0;
    while ((pos = out.find(s, pos)) != std::string::npos) {
      out.replace(pos, s.size(), "***");
      pos += 3;
    }
  }
  return out;
}

void ScrubbingSink::sink_it_(const spdlog::details::log_msg& msg) {
  const std::string clean = scrub(std::string_view(msg.payload.data(), msg.payload.size()), secrets_);
  spdlog::details::log_msg copy(msg);
  copy.payload = spdlog::string_view_t(clean.data(), clean.size());
  inner_->log(copy);
}

std::shared_ptr<spdlog::logger> make_logger(const std::string& name, const std::string& file, bool quiet) {
  const auto secrets = secrets_from_env();
  std::vector<spdlog::sink_ptr> sinks;
  if (!quiet) {
    auto err = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    sinks.push_back(std::make_shared<ScrubbingSink>(err, secrets));
  }
  if (!file.empty()) {
    auto f = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file, false);
    sinks.push_back(std::make_shared<ScrubbingSink>(f, secrets));
  }
  auto logger = std::make_shared<spdlog::logger>(name, sinks.begin(), sinks.end());
  logger->set_pattern("[%Y-%m-%dT%H:%M:%S.%e] [%l] %v");
  logger->flush_on(spdlog::level::info);
  return logger;
}

}  // namespace dim::log
