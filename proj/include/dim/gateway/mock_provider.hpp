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

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>

#include "dim/core/types.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::gateway {

struct MockOptions {
  std::string model_tag = "mock";
  std::uint64_t seed = 17;
  // Any request whose messages contain this marker gets an unusable answer,
  // which lets tests and hermetic runs exercise permanent failures.
  std::string fail_marker = "[[mock-fail]]";
  std::optional<Verdict> fixed_verdict;
  std::optional<Tier> fixed_tier;
  int words_per_dimension = 10;
};

// Deterministic, offline provider. Answers every request purpose in the
// grammar the pipeline expects; the answer depends only on the request
// content and the seed.
class MockProvider final : public ChatProvider {
 public:
  explicit MockProvider(MockOptions options = {}) : options_(std::move(options)) {}

  ProviderResponse complete(const ProviderRequest& request) override;
  std::int64_t call_count() const { return calls_.load(); }
  const MockOptions& options() const { return options_; }

 private:
  MockOptions options_;
  std::atomic<std::int64_t> calls_{0};
};

}  // namespace dim::gateway
