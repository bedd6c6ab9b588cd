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

#include "dim/gateway/request.hpp"

#include <json.hpp>

#include "dim/core/digest.hpp"

namespace dim::gateway {

std::string sniff_media_type(std::string_view b) {
  if (b.size() >= 8 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8)) return "image/png";
  if (b.size() >= 3 && static_cast<unsigned char>(b[0]) == 0xFF &&
      static_cast<unsigned char>(b[1]) == 0xD8 && static_cast<unsigned char>(b[2]) == 0xFF)
    return "image/jpeg";
  if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WEBP") return "image/webp";
  if (b.size() >= 6 && (b.substr(0, 6) == "GIF87a" || b.substr(0, 6) == "GIF89a")) return "image/gif";
  if (b.size() >= 2 && b.substr(0, 2) == "BM") return "image/bmp";
  return "application/octet-stream";
}

ImageAttachment ImageAttachment::from_blob(const ImageBlob& blob) {
  ImageAttachment a;
  a.bytes = blob.bytes;
  a.digest = blob.digest.empty() && blob.bytes ? sha256_hex(*blob.bytes) : blob.digest;
  a.media_type = blob.bytes ? sniff_media_type(*blob.bytes) : "application/octet-stream";
  return a;
}

std::string ProviderRequest::request_hash() const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& img : m.images) images.push_back(img.digest);
    msgs.push_back({{"role", m.role}, {"text", m.text}, {"images", images}});
  }
  nlohmann::json canonical{{"provider_tag", provider_tag},
                           {"model_tag", model_tag},
                           {"purpose", purpose},
                           {"messages", msgs},
                           {"temperature", decoding.temperature},
                           {"max_output_tokens", decoding.max_output_tokens}};
  return sha256_hex(canonical.dump());
}

std::size_t ProviderRequest::image_count() const {
  std::size_t n = 0;
  for (const auto& m : messages) n += m.images.size();
  return n;
}

std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Auth: return "auth";
    case ErrorKind::RateLimited: return "rate_limited";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Unavailable: return "unavailable";
    case ErrorKind::MalformedResponse: return "malformed_response";
  }
  return "?";
}

}  // namespace dim::gateway
