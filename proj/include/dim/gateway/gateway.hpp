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
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dim/gateway/request.hpp"

namespace dim::gateway {

// A model backend. Implementations throw ProviderError on failure.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  // Throws ProviderError(Auth) when credentials are missing. Called before
  // any network attempt.
  virtual void check_ready() const {}
  virtual ProviderResponse complete(const ProviderRequest& request) = 0;
};

struct ProviderLimits {
  int max_in_flight = 4;
  double rpm_limit = 0.0;  // requests per minute; 0 disables pacing
};

// Exponential backoff: delay(n) = base * factor^(n-1) * (1 + jitter * U[0,1)),
// n = 1 for the first retry. `max_attempts` counts the first try.
struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  double jitter = 0.25;
  int max_attempts = 5;
};

struct ModelUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t calls = 0;
};

struct CostReport {
  std::string ns;
  bool known = false;
  std::map<std::string, ModelUsage> per_model;
  std::int64_t requests = 0;        // every call() that returned a response
  std::int64_t cached = 0;          // served from cache
  std::int64_t provider_calls = 0;  // responses that came from a provider
  std::int64_t attempts = 0;        // provider attempts including retries
  std::int64_t failures = 0;        // call() that ended in an error

  double cache_hit_rate() const {
    return requests == 0 ? 0.0 : static_cast<double>(cached) / static_cast<double>(requests);
  }
  std::int64_t total_input_tokens() const;
  std::int64_t total_output_tokens() const;
  nlohmann::json to_json() const;
};

// Content-addressed response store. With a directory, entries persist as
// <dir>/<namespace>/<hash[0:2]>/<hash>.json, written atomically.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<ProviderResponse> lookup(std::string_view ns, const std::string& key);
  void store(std::string_view ns, const std::string& key, const std::string& model_tag,
             const ProviderResponse& response);

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::unordered_map<std::string, ProviderResponse> memory_;
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  // Injected so tests can observe backoff without waiting.
  std::function<void(std::chrono::milliseconds)> sleep;
  std::uint64_t jitter_seed = 0x5eed;
};

// Thread-safe front door for every model call: caching, admission control,
// retries and cost accounting.
class Gateway {
 public:
  explicit Gateway(GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void add_provider(const std::string& tag, std::shared_ptr<ChatProvider> provider,
                    ProviderLimits limits = {});
  bool has_provider(std::string_view tag) const;

  ProviderResponse call(const ProviderRequest& request, std::string_view ns = "default");

  CostReport cost_report(std::string_view ns) const;
  std::vector<std::string> namespaces() const;

 private:
  struct Slot;
  Slot& slot_for(std::string_view tag);
  std::chrono::milliseconds backoff_delay(int retry_number);

  GatewayOptions options_;
  ResponseCache cache_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
  std::map<std::string, CostReport, std::less<>> ledgers_;
  std::mt19937_64 jitter_rng_;
};

}  // namespace dim::gateway
