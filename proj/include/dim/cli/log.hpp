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

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/logger.h>
#include <spdlog/sinks/base_sink.h>

namespace dim::log {

// Values of every DIM_*_API_KEY variable in the environment.
std::vector<std::string> secrets_from_env();

// Replaces each occurrence of a secret with "***". Secrets shorter than four
// bytes are ignored so that masking cannot shred ordinary text.
std::string scrub(std::string_view text, const std::vector<std::string>& secrets);

// Forwards to `inner` after masking secrets in the message payload.
class ScrubbingSink final : public spdlog::sinks::base_sink<std::mutex> {
 public:
  ScrubbingSink(spdlog::sink_ptr inner, std::vector<std::string> secrets)
      : inner_(std::move(inner)), secrets_(std::move(secrets)) {}

 protected:
  void sink_it_(const spdlog::details::log_msg& msg) override;
  void flush_() override { inner_->flush(); }
  void set_pattern_(const std::string& pattern) override { inner_->set_pattern(pattern); }
  void set_formatter_(std::unique_ptr<spdlog::formatter> f) override { inner_->set_formatter(std::move(f)); }

 private:
  spdlog::sink_ptr inner_;
  std::vector<std::string> secrets_;
};

// Logger writing to stderr (and `file` when non-empty) through a
// ScrubbingSink loaded with secrets_from_env().
std::shared_ptr<spdlog::logger> make_logger(const std::string& name, const std::string& file = {},
                                            bool quiet = false);

}  // namespace dim::log
