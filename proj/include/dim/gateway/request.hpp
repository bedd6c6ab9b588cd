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

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dim/core/image.hpp"

namespace dim::gateway {

// Purpose tags carried on every request. Part of the semantic content (and so
// of the cache key); never sent on the wire.
namespace purpose {
inline constexpr std::string_view kVerdict = "verdict";
inline constexpr std::string_view kOptimizePartial = "optimize_partial";
inline constexpr std::string_view kOptimizeAligned = "optimize_aligned";
inline constexpr std::string_view kCot = "cot";
inline constexpr std::string_view kDesign = "design";
inline constexpr std::string_view kCaption = "caption";
inline constexpr std::string_view kCaptionDimension = "caption_dimension";
inline constexpr std::string_view kAudit = "audit";
inline constexpr std::string_view kJudgeImgEdit = "judge_imgedit9";
inline constexpr std::string_view kJudgeGEdit = "judge_gedit11";
inline constexpr std::string_view kEmbed = "embed";
}  // namespace purpose

struct ImageAttachment {
  std::string digest;
  std::string media_type;
  std::shared_ptr<const std::string> bytes;

  static ImageAttachment from_blob(const ImageBlob& blob);
};

std::string sniff_media_type(std::string_view bytes);

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
  std::vector<ImageAttachment> images;
};

struct Decoding {
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

struct ProviderRequest {
  std::string provider_tag;
  std::string model_tag;
  std::string purpose;
  std::vector<Message> messages;
  Decoding decoding;
  std::string trace_id;  // diagnostics only; excluded from the hash

  // Digest of every semantic field. Images contribute their content digest.
  std::string request_hash() const;
  std::size_t image_count() const;
};

struct Usage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct ProviderResponse {
  std::string text;
  Usage usage;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  int attempts = 0;
};

enum class ErrorKind { Auth, RateLimited, Timeout, Unavailable, MalformedResponse };
std::string_view to_string(ErrorKind k);

class ProviderError : public std::runtime_error {
 public:
  ProviderError(ErrorKind kind, const std::string& what, std::string raw_body = {})
      : std::runtime_error(what), kind_(kind), raw_body_(std::move(raw_body)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& raw_body() const { return raw_body_; }
  bool retryable() const {
    return kind_ == ErrorKind::RateLimited || kind_ == ErrorKind::Timeout ||
           kind_ == ErrorKind::Unavailable;
  }
  int attempts() const { return attempts_; }
  void set_attempts(int n) { attempts_ = n; }

 private:
  ErrorKind kind_;
  std::string raw_body_;
  int attempts_ = 0;
};

}  // namespace dim::gateway
