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

#include <chrono>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dim/gateway/gateway.hpp"

namespace dim::gateway {

// "DIM_<TAG>_" with the tag upper-cased and non-alphanumerics mapped to '_'.
std::string env_prefix(std::string_view provider_tag);

struct HttpProviderConfig {
  std::string provider_tag;
  std::string model_tag;
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};

  // Reads DIM_<TAG>_API_KEY and DIM_<TAG>_BASE_URL.
  static HttpProviderConfig from_env(std::string provider_tag, std::string model_tag);
};

// Chat-completions request body; images travel as base64 data URLs.
nlohmann::json build_chat_payload(const ProviderRequest& request);
// Embeddings request body for purpose "embed".
nlohmann::json build_embedding_payload(const ProviderRequest& request);

// Maps an HTTP status + body to a response or a typed ProviderError:
// 401/403 Auth, 429 RateLimited, 408/5xx Timeout, unparseable 2xx Malformed.
ProviderResponse parse_chat_response(int status, const std::string& body);
ProviderResponse parse_embedding_response(int status, const std::string& body);

// OpenAI-compatible endpoint client.
class OpenAiCompatibleProvider final : public ChatProvider {
 public:
  explicit OpenAiCompatibleProvider(HttpProviderConfig config) : config_(std::move(config)) {}

  void check_ready() const override;
  ProviderResponse complete(const ProviderRequest& request) override;

 private:
  HttpProviderConfig config_;
};

}  // namespace dim::gateway
