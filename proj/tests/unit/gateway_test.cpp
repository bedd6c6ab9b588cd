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

#include <atomic>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "dim/core/parallel.hpp"
#include "dim/gateway/gateway.hpp"
#include "dim/core/text.hpp"
#include "dim/gateway/mock_provider.hpp"
#include "fixtures.hpp"

namespace dim::gateway {
namespace {

namespace fs = std::filesystem;

ProviderRequest request(std::string text, std::string purpose = std::string(purpose::kVerdict)) {
  ProviderRequest r;
  r.provider_tag = "p";
  r.model_tag = "m";
  r.purpose = std::move(purpose);
  r.messages.push_back({"user", std::move(text), {}});
  return r;
}

TEST(RequestHash, CoversSemanticFieldsOnly) {
  auto a = request("hello");
  auto b = a;
  b.trace_id = "different";
  EXPECT_EQ(a.request_hash(), b.request_hash());
  b = a;
  b.decoding.temperature = 0.5;
  EXPECT_NE(a.request_hash(), b.request_hash());
  b = a;
  b.purpose = purpose::kCot;
  EXPECT_NE(a.request_hash(), b.request_hash());
  b = a;
  b.model_tag = "other";
  EXPECT_NE(a.request_hash(), b.request_hash());
  b = a;
  b.messages[0].images.push_back(ImageAttachment{"abc", "image/png", nullptr});
  EXPECT_NE(a.request_hash(), b.request_hash());
  EXPECT_EQ(b.image_count(), 1u);
}

TEST(Gateway, SecondIdenticalCallIsServedFromCache) {
  Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_text("VERDICT: Aligned");
  gw.add_provider("p", scripted);
  auto first = gw.call(request("x"), "ns");
  auto second = gw.call(request("x"), "ns");
  EXPECT_FALSE(first.from_cache);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.text, first.text);
  EXPECT_EQ(scripted->calls(), 1);
  auto cost = gw.cost_report("ns");
  EXPECT_EQ(cost.requests, 2);
  EXPECT_EQ(cost.cached, 1);
  EXPECT_EQ(cost.provider_calls, 1);
  EXPECT_DOUBLE_EQ(cost.cache_hit_rate(), 0.5);
  EXPECT_EQ(cost.per_model.at("m").input_tokens, 10);
}

TEST(Gateway, CacheHitRateIsZeroWithoutRequests) {
  Gateway gw(testing::no_sleep_options());
  EXPECT_EQ(gw.cost_report("nothing").cache_hit_rate(), 0.0);
  EXPECT_FALSE(gw.cost_report("nothing").known);
}

TEST(Gateway, RetriesTransientErrorsWithGrowingBackoff) {
  auto opts = testing::no_sleep_options();
  std::vector<std::chrono::milliseconds> sleeps;
  opts.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  opts.retry.base = std::chrono::milliseconds(100);
  opts.retry.jitter = 0.0;
  Gateway gw(opts);
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_error(ErrorKind::RateLimited);
  scripted->push_error(ErrorKind::Timeout);
  scripted->push_text("ok");
  gw.add_provider("p", scripted);
  auto r = gw.call(request("x"));
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempts, 3);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0].count(), 100);
  EXPECT_EQ(sleeps[1].count(), 200);
  EXPECT_EQ(gw.cost_report("default").attempts, 3);
}

TEST(Gateway, JitterStaysWithinBounds) {
  auto opts = testing::no_sleep_options();
  std::vector<std::chrono::milliseconds> sleeps;
  opts.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  opts.retry.base = std::chrono::milliseconds(1000);
  opts.retry.max_attempts = 4;
  Gateway gw(opts);
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  for (int i = 0; i < 3; ++i) scripted->push_error(ErrorKind::Unavailable);
  scripted->push_text("ok");
  gw.add_provider("p", scripted);
  gw.call(request("x"));
  ASSERT_EQ(sleeps.size(), 3u);
  for (std::size_t i = 0; i < sleeps.size(); ++i) {
    const double lo = 1000.0 * std::pow(2.0, static_cast<double>(i));
    EXPECT_GE(sleeps[i].count(), lo);
    EXPECT_LE(sleeps[i].count(), lo * 1.25);
  }
}

TEST(Gateway, GivesUpAfterMaxAttempts) {
  auto opts = testing::no_sleep_options();
  opts.retry.max_attempts = 2;
  Gateway gw(opts);
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_error(ErrorKind::RateLimited);
  scripted->push_error(ErrorKind::RateLimited);
  gw.add_provider("p", scripted);
  try {
    gw.call(request("x"));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RateLimited);
    EXPECT_EQ(e.attempts(), 2);
  }
  EXPECT_EQ(gw.cost_report("default").failures, 1);
}

TEST(Gateway, AuthErrorsAreNotRetried) {
  Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_error(ErrorKind::Auth);
  gw.add_provider("p", scripted);
  EXPECT_THROW(gw.call(request("x")), ProviderError);
  EXPECT_EQ(scripted->calls(), 1);
}

TEST(Gateway, FailuresAreNotCached) {
  Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_error(ErrorKind::MalformedResponse);
  scripted->push_text("fine");
  gw.add_provider("p", scripted);
  EXPECT_THROW(gw.call(request("x")), ProviderError);
  EXPECT_EQ(gw.call(request("x")).text, "fine");
}

TEST(Gateway, UnknownProviderIsAnError) {
  Gateway gw(testing::no_sleep_options());
  EXPECT_THROW(gw.call(request("x")), std::exception);
}

class SlowProvider final : public ChatProvider {
 public:
  ProviderResponse complete(const ProviderRequest& r) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    ProviderResponse out;
    out.text = r.messages.at(0).text;
    return out;
  }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

TEST(Gateway, RespectsMaxInFlight) {
  Gateway gw(testing::no_sleep_options());
  auto slow = std::make_shared<SlowProvider>();
  gw.add_provider("p", slow, ProviderLimits{2, 0.0});
  parallel_for(24, 8, [&](std::size_t i) { gw.call(request("r" + std::to_string(i))); });
  EXPECT_LE(slow->peak.load(), 2);
  EXPECT_GE(slow->peak.load(), 1);
  EXPECT_EQ(gw.cost_report("default").provider_calls, 24);
}

TEST(Gateway, DiskCacheSurvivesNewGateway) {
  auto dir = fs::temp_directory_path() / ("dim-unit-cache-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto opts = testing::no_sleep_options();
  opts.cache_dir = dir;
  {
    Gateway gw(opts);
    auto scripted = std::make_shared<testing::ScriptedProvider>();
    scripted->push_text("persisted");
    gw.add_provider("p", scripted);
    gw.call(request("x"), "ns");
  }
  Gateway gw(opts);
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  gw.add_provider("p", scripted);
  auto r = gw.call(request("x"), "ns");
  EXPECT_TRUE(r.from_cache);
  EXPECT_EQ(r.text, "persisted");
  EXPECT_EQ(scripted->calls(), 0);
  EXPECT_TRUE(fs::exists(dir / "ns"));
  fs::remove_all(dir);
}

TEST(MockProvider, DeterministicAndSeedSensitive) {
  MockProvider a, b;
  MockOptions other;
  other.seed = 18;
  MockProvider c(other);
  int changed = 0;
  for (int i = 0; i < 50; ++i) {
    auto r = request("Instruction: add a hat " + std::to_string(i));
    EXPECT_EQ(a.complete(r).text, b.complete(r).text);
    changed += a.complete(r).text != c.complete(r).text;
  }
  EXPECT_GT(changed, 0);
}

TEST(MockProvider, VerdictBucketsRoughlyMatchSplit) {
  MockProvider mock;
  std::map<std::string, int> counts;
  for (int i = 0; i < 2000; ++i) {
    auto text = mock.complete(request("Instruction: edit " + std::to_string(i))).text;
    auto v = text::labeled_values(text, "VERDICT");
    ASSERT_EQ(v.size(), 1u) << text;
    ++counts[v[0]];
  }
  EXPECT_NEAR(counts["Misaligned"] / 2000.0, 0.2, 0.04);
  EXPECT_NEAR(counts["PartiallyAligned"] / 2000.0, 0.3, 0.04);
  EXPECT_NEAR(counts["Aligned"] / 2000.0, 0.5, 0.04);
}

TEST(MockProvider, FailMarkerYieldsUnusableAnswer) {
  MockProvider mock;
  auto text = mock.complete(request("Instruction: [[mock-fail]] add")).text;
  EXPECT_TRUE(text::labeled_values(text, "VERDICT").empty());
}

TEST(MockProvider, CotAnswerParsesAsBlueprint) {
  MockProvider mock;
  auto text = mock.complete(request("Instruction: put a lamp on the desk", std::string(purpose::kCot))).text;
  auto bp = validate_blueprint(parse_blueprint_text(text));
  ASSERT_TRUE(bp.ok()) << text;
}

}  // namespace
}  // namespace dim::gateway
