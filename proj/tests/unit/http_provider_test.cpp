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
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include "dim/core/digest.hpp"
#include "dim/gateway/gateway.hpp"
#include "dim/gateway/http_provider.hpp"
#include "fixtures.hpp"

namespace dim::gateway {
namespace {

const char* kOkBody =
    R"({"choices":[{"message":{"role":"assistant","content":"VERDICT: Aligned"}}],)"
    R"("usage":{"prompt_tokens":12,"completion_tokens":3}})";

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& prefix = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ProviderRequest chat_request() {
  ProviderRequest r;
  r.provider_tag = "annotator";
  r.model_tag = "gpt-test";
  r.purpose = purpose::kVerdict;
  r.messages.push_back({"user", "judge this", {}});
  return r;
}

TEST(HttpProvider, EnvPrefix) {
  EXPECT_EQ(env_prefix("annotator"), "DIM_ANNOTATOR_");
  EXPECT_EQ(env_prefix("my-judge.2"), "DIM_MY_JUDGE_2_");
}

TEST(HttpProvider, StatusMapping) {
  auto kind = [](int status, const std::string& body) {
    try {
      parse_chat_response(status, body);
    } catch (const ProviderError& e) {
      return std::optional<ErrorKind>(e.kind());
    }
    return std::optional<ErrorKind>();
  };
  EXPECT_EQ(kind(401, "{}"), ErrorKind::Auth);
  EXPECT_EQ(kind(403, "{}"), ErrorKind::Auth);
  EXPECT_EQ(kind(429, "{}"), ErrorKind::RateLimited);
  EXPECT_EQ(kind(503, "{}"), ErrorKind::Timeout);
  EXPECT_EQ(kind(200, "not json"), ErrorKind::MalformedResponse);
  EXPECT_EQ(kind(200, R"({"choices":[]})"), ErrorKind::MalformedResponse);
  EXPECT_FALSE(kind(200, kOkBody).has_value());
  auto r = parse_chat_response(200, kOkBody);
  EXPECT_EQ(r.text, "VERDICT: Aligned");
  EXPECT_EQ(r.usage.input_tokens, 12);
  EXPECT_EQ(r.usage.output_tokens, 3);
}

TEST(HttpProvider, PayloadCarriesImagesAsDataUrls) {
  auto req = chat_request();
  auto png = testing::png(4, 4, std::vector<std::uint8_t>(48, 9));
  ImageBlob blob{"x", std::make_shared<const std::string>(png), 4, 4, sha256_hex(png)};
  req.messages[0].images.push_back(ImageAttachment::from_blob(blob));
  auto payload = build_chat_payload(req);
  EXPECT_EQ(payload.at("model"), "gpt-test");
  const auto dump = payload.dump();
  EXPECT_NE(dump.find("data:image/png;base64,"), std::string::npos);
  EXPECT_EQ(dump.find("verdict\""), std::string::npos);  // purpose is not on the wire
}

TEST(HttpProvider, MissingKeyFailsBeforeAnyNetworkCall) {
  HttpProviderConfig cfg;
  cfg.provider_tag = "annotator";
  cfg.model_tag = "m";
  cfg.base_url = "http://127.0.0.1:9";
  OpenAiCompatibleProvider provider(cfg);
  try {
    provider.check_ready();
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Auth);
    EXPECT_NE(std::string(e.what()).find("DIM_ANNOTATOR_API_KEY"), std::string::npos);
  }
}

TEST(HttpProvider, RateLimitThenSuccessThroughGateway) {
  LocalServer local;
  std::atomic<int> hits{0};
  std::string seen_auth;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    if (hits++ == 0) {
      res.status = 429;
      res.set_content(R"({"error":"slow down"})", "application/json");
      return;
    }
    res.set_content(kOkBody, "application/json");
  });

  HttpProviderConfig cfg;
  cfg.provider_tag = "annotator";
  cfg.model_tag = "gpt-test";
  cfg.base_url = local.url();
  cfg.api_key = "sk-local-test";
  cfg.timeout = std::chrono::seconds(5);

  Gateway gw(testing::no_sleep_options());
  gw.add_provider("annotator", std::make_shared<OpenAiCompatibleProvider>(cfg));
  auto r = gw.call(chat_request(), "annotate");
  EXPECT_EQ(r.text, "VERDICT: Aligned");
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(seen_auth, "Bearer sk-local-test");
  EXPECT_EQ(gw.cost_report("annotate").per_model.at("gpt-test").input_tokens, 12);
}

TEST(HttpProvider, EmbeddingsEndpoint) {
  LocalServer local;
  local.server().Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data":[{"embedding":[0.5,0.25,1.0]}],"usage":{"prompt_tokens":4}})",
                    "application/json");
  });
  HttpProviderConfig cfg;
  cfg.provider_tag = "embedder";
  cfg.model_tag = "clip-like";
  cfg.base_url = local.url();
  cfg.api_key = "k";
  OpenAiCompatibleProvider provider(cfg);
  auto req = chat_request();
  req.purpose = purpose::kEmbed;
  auto r = provider.complete(req);
  auto arr = nlohmann::json::parse(r.text);
  ASSERT_EQ(arr.size(), 3u);
  EXPECT_DOUBLE_EQ(arr[1].get<double>(), 0.25);
}

TEST(HttpProvider, FromEnvReadsKeyAndUrl) {
  ::setenv("DIM_ENVTEST_API_KEY", "abc123", 1);
  ::setenv("DIM_ENVTEST_BASE_URL", "http://example.invalid/v9", 1);
  auto cfg = HttpProviderConfig::from_env("envtest", "m");
  EXPECT_EQ(cfg.api_key, "abc123");
  EXPECT_EQ(cfg.base_url, "http://example.invalid/v9");
  ::unsetenv("DIM_ENVTEST_API_KEY");
  ::unsetenv("DIM_ENVTEST_BASE_URL");
}

}  // namespace
}  // namespace dim::gateway
