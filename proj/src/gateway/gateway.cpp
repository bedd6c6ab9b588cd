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

#include "dim/gateway/gateway.hpp"

#include <cmath>
#include <thread>

#include "dim/core/jsonl.hpp"

namespace dim::gateway {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::int64_t CostReport::total_input_tokens() const {
  std::int64_t n = 0;
  for (const auto& [_, u] : per_model) n += u.input_tokens;
  return n;
}

std::int64_t CostReport::total_output_tokens() const {
  std::int64_t n = 0;
  for (const auto& [_, u] : per_model) n += u.output_tokens;
  return n;
}

nlohmann::json CostReport::to_json() const {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [model, u] : per_model) {
    models[model] = {{"input_tokens", u.input_tokens},
                     {"output_tokens", u.output_tokens},
                     {"calls", u.calls}};
  }
  return {{"namespace", ns},
          {"known", known},
          {"per_model", models},
          {"requests", requests},
          {"cached", cached},
          {"provider_calls", provider_calls},
          {"attempts", attempts},
          {"failures", failures},
          {"input_tokens", total_input_tokens()},
          {"output_tokens", total_output_tokens()},
          {"cache_hit_rate", cache_hit_rate()}};
}

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) fs::create_directories(*dir_);
}

std::optional<ProviderResponse> ResponseCache::lookup(std::string_view ns, const std::string& key) {
  const std::string mem_key = std::string(ns) + "/" + key;
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(mem_key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  const fs::path file = *dir_ / std::string(ns) / key.substr(0, 2) / (key + ".json");
  std::error_code ec;
  if (!fs::exists(file, ec)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(file));
    if (j.at("request_hash").get<std::string>() != key) return std::nullopt;
    ProviderResponse r;
    r.text = j.at("text").get<std::string>();
    r.usage.input_tokens = j.at("usage").at("input_tokens").get<std::int64_t>();
    r.usage.output_tokens = j.at("usage").at("output_tokens").get<std::int64_t>();
    std::lock_guard lock(mu_);
    memory_.emplace(mem_key, r);
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
}

void ResponseCache::store(std::string_view ns, const std::string& key, const std::string& model_tag,
                          const ProviderResponse& response) {
  ProviderResponse stored;
  stored.text = response.text;
  stored.usage = response.usage;
  {
    std::lock_guard lock(mu_);
    memory_[std::string(ns) + "/" + key] = stored;
  }
  if (!dir_) return;
  const nlohmann::json j{{"request_hash", key},
                         {"model_tag", model_tag},
                         {"text", response.text},
                         {"usage",
                          {{"input_tokens", response.usage.input_tokens},
                           {"output_tokens", response.usage.output_tokens}}}};
  atomic_write_file(*dir_ / std::string(ns) / key.substr(0, 2) / (key + ".json"), j.dump());
}

struct Gateway::Slot {
  std::shared_ptr<ChatProvider> provider;
  ProviderLimits limits;
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
  Clock::time_point next_start{};

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return in_flight < std::max(1, limits.max_in_flight); });
    ++in_flight;
    if (limits.rpm_limit > 0) {
      const auto spacing = std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(60.0 / limits.rpm_limit));
      const auto now = Clock::now();
      const auto start = std::max(now, next_start);
      next_start = start + spacing;
      if (start > now) {
        lock.unlock();
        std::this_thread::sleep_until(start);
      }
    }
  }

  void release() {
    {
      std::lock_guard lock(mu);
      --in_flight;
    }
    cv.notify_one();
  }
};

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)), cache_(options_.cache_dir), jitter_rng_(options_.jitter_seed) {
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

Gateway::~Gateway() = default;

void Gateway::add_provider(const std::string& tag, std::shared_ptr<ChatProvider> provider,
                           ProviderLimits limits) {
  auto slot = std::make_unique<Slot>();
  slot->provider = std::move(provider);
  slot->limits = limits;
  std::lock_guard lock(mu_);
  slots_[tag] = std::move(slot);
}

bool Gateway::has_provider(std::string_view tag) const {
  std::lock_guard lock(mu_);
  return slots_.find(tag) != slots_.end();
}

Gateway::Slot& Gateway::slot_for(std::string_view tag) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(tag);
  if (it == slots_.end()) throw std::invalid_argument("unknown provider '" + std::string(tag) + "'");
  return *it->second;
}

std::chrono::milliseconds Gateway::backoff_delay(int retry_number) {
  const auto& r = options_.retry;
  double u = 0.0;
  {
    std::lock_guard lock(mu_);
    u = std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng_);
  }
  const double ms = static_cast<double>(r.base.count()) * std::pow(r.factor, retry_number - 1) *
                    (1.0 + r.jitter * u);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

ProviderResponse Gateway::call(const ProviderRequest& request, std::string_view ns) {
  Slot& slot = slot_for(request.provider_tag);
  const std::string key = request.request_hash();

  auto ledger = [&](auto&& fn) {
    std::lock_guard lock(mu_);
    auto it = ledgers_.find(ns);
    if (it == ledgers_.end()) {
      it = ledgers_.emplace(std::string(ns), CostReport{}).first;
      it->second.ns = std::string(ns);
      it->second.known = true;
    }
    fn(it->second);
  };

  if (auto hit = cache_.lookup(ns, key)) {
    hit->from_cache = true;
    hit->attempts = 0;
    ledger([](CostReport& c) {
      ++c.requests;
      ++c.cached;
    });
    return *hit;
  }

  try {
    slot.provider->check_ready();
  } catch (ProviderError& e) {
    ledger([](CostReport& c) { ++c.failures; });
    throw;
  }

  const int max_attempts = std::max(1, options_.retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    slot.acquire();
    const auto started = Clock::now();
    ProviderResponse response;
    try {
      response = slot.provider->complete(request);
    } catch (ProviderError& e) {
      slot.release();
      e.set_attempts(attempt);
      if (!e.retryable() || attempt >= max_attempts) {
        ledger([&](CostReport& c) {
          c.attempts += attempt;
          ++c.failures;
        });
        throw;
      }
      options_.sleep(backoff_delay(attempt));
      continue;
    } catch (...) {
      slot.release();
      ledger([&](CostReport& c) {
        c.attempts += attempt;
        ++c.failures;
      });
      throw;
    }
    slot.release();

    if (response.usage.input_tokens < 0 || response.usage.output_tokens < 0) {
      ledger([&](CostReport& c) {
        c.attempts += attempt;
        ++c.failures;
      });
      ProviderError e(ErrorKind::MalformedResponse, "negative usage counters", response.text);
      e.set_attempts(attempt);
      throw e;
    }
    response.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
    response.from_cache = false;
    response.attempts = attempt;
    cache_.store(ns, key, request.model_tag, response);
    ledger([&](CostReport& c) {
      ++c.requests;
      ++c.provider_calls;
      c.attempts += attempt;
      auto& m = c.per_model[request.model_tag];
      m.input_tokens += response.usage.input_tokens;
      m.output_tokens += response.usage.output_tokens;
      ++m.calls;
    });
    return response;
  }
}

CostReport Gateway::cost_report(std::string_view ns) const {
  std::lock_guard lock(mu_);
  if (auto it = ledgers_.find(ns); it != ledgers_.end()) return it->second;
  CostReport empty;
  empty.ns = std::string(ns);
  empty.known = false;
  return empty;
}

std::vector<std::string> Gateway::namespaces() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [ns, _] : ledgers_) out.push_back(ns);
  return out;
}

}  // namespace dim::gateway
