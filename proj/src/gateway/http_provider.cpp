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

#include "dim/gateway/http_provider.hpp"

#include <cctype>
#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dim/core/digest.hpp"

namespace dim::gateway {

std::string env_prefix(std::string_view provider_tag) {
  std::string out = "DIM_";
  for (char c : provider_tag) {
    out += std::isalnum(static_cast<unsigned char>(c))
               ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
               : '_';
  }
  out += '_';
  return out;
}

HttpProviderConfig HttpProviderConfig::from_env(std::string provider_tag, std::string model_tag) {
  HttpProviderConfig c;
  const std::string prefix = env_prefix(provider_tag);
  c.provider_tag = std::move(provider_tag);
  c.model_tag = std::move(model_tag);
  if (const char* key = std::getenv((prefix + "API_KEY").c_str())) c.api_key = key;
  if (const char* url = std::getenv((prefix + "BASE_URL").c_str()); url && *url) c.base_url = url;
  return c;
}

nlohmann::json build_chat_payload(const ProviderRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    if (m.images.empty()) {
      messages.push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    nlohmann::json parts = nlohmann::json::array();
    if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& img : m.images) {
      const std::string url = "data:" + img.media_type + ";base64," +
                              (img.bytes ? base64_encode(*img.bytes) : std::string());
      parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    messages.push_back({{"role", m.role}, {"content", parts}});
  }
  return {{"model", request.model_tag},
          {"messages", messages},
          {"temperature", request.decoding.temperature},
          {"max_tokens", request.decoding.max_output_tokens}};
}

nlohmann::json build_embedding_payload(const ProviderRequest& request) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& m : request.messages) {
    for (const auto& img : m.images) {
      inputs.push_back("data:" + img.media_type + ";base64," +
                       (img.bytes ? base64_encode(*img.bytes) : std::string()));
    }
  }
  return {{"model", request.model_tag}, {"input", inputs}};
}

namespace {

void raise_for_status(int status, const std::string& body) {
  if (status >= 200 && status < 300) return;
  const std::string what = "provider returned HTTP " + std::to_string(status);
  if (status == 401 || status == 403) throw ProviderError(ErrorKind::Auth, what, body);
  if (status == 429) throw ProviderError(ErrorKind::RateLimited, what, body);
  if (status == 408 || status >= 500) throw ProviderError(ErrorKind::Timeout, what, body);
  throw ProviderError(ErrorKind::MalformedResponse, what, body);
}

Usage parse_usage(const nlohmann::json& j) {
  Usage u;
  if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
    u.input_tokens = it->value("prompt_tokens", std::int64_t{0});
    u.output_tokens = it->value("completion_tokens", std::int64_t{0});
  }
  return u;
}

}  // namespace

ProviderResponse parse_chat_response(int status, const std::string& body) {
  raise_for_status(status, body);
  try {
    const auto j = nlohmann::json::parse(body);
    ProviderResponse r;
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    r.usage = parse_usage(j);
    return r;
  } catch (const std::exception& e) {
    throw ProviderError(ErrorKind::MalformedResponse, std::string("malformed response: ") + e.what(), body);
  }
}

ProviderResponse parse_embedding_response(int status, const std::string& body) {
  raise_for_status(status, body);
  try {
    const auto j = nlohmann::json::parse(body);
    ProviderResponse r;
    r.text = j.at("data").at(0).at("embedding").dump();
    r.usage = parse_usage(j);
    return r;
  } catch (const std::exception& e) {
    throw ProviderError(ErrorKind::MalformedResponse, std::string("malformed response: ") + e.what(), body);
  }
}

void OpenAiCompatibleProvider::check_ready() const {
  if (config_.api_key.empty())
    throw ProviderError(ErrorKind::Auth, env_prefix(config_.provider_tag) + "API_KEY is not set");
}

ProviderResponse OpenAiCompatibleProvider::complete(const ProviderRequest& request) {
  check_ready();
  const bool embed = request.purpose == purpose::kEmbed;

  // Split "scheme://host[:port]/prefix" so the path prefix survives.
  const auto scheme_end = config_.base_url.find("://");
  const auto path_start = config_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = config_.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  client.set_bearer_token_auth(config_.api_key);

  const auto payload = embed ? build_embedding_payload(request) : build_chat_payload(request);
  auto res = client.Post(prefix + (embed ? "/embeddings" : "/chat/completions"), payload.dump(),
                         "application/json");
  if (!res) {
    throw ProviderError(ErrorKind::Timeout, "transport error: " + httplib::to_string(res.error()));
  }
  return embed ? parse_embedding_response(res->status, res->body)
               : parse_chat_response(res->status, res->body);
}

}  // namespace dim::gateway
