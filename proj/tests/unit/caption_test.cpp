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

#include <gtest/gtest.h>

#include "dim/core/digest.hpp"
#include "dim/annotate/caption.hpp"
#include "dim/audit/audit.hpp"
#include "dim/gateway/mock_provider.hpp"
#include "fixtures.hpp"

namespace dim::annotate {
namespace {

ImageBlob blob(int w, int h) {
  auto bytes = testing::png(4, 4, std::vector<std::uint8_t>(48, 30));
  return ImageBlob{"img-" + std::to_string(w), std::make_shared<const std::string>(bytes), w, h, sha256_hex(bytes)};
}

CaptionOptions options(CaptionMode mode) {
  CaptionOptions o;
  o.provider_tag = "captioner";
  o.model_tag = "cap-model";
  o.mode = mode;
  return o;
}

TEST(Caption, StructuredParse) {
  auto ok = parse_structured_caption("DIMENSION 1: red\nDIMENSION 2:\nblue sky\nmore", 2);
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(ok.value()[0], "red");
  EXPECT_EQ(ok.value()[1], "blue sky\nmore");
  auto missing = parse_structured_caption("DIMENSION 1: red", 2);
  ASSERT_FALSE(missing.ok());
  EXPECT_FALSE(parse_structured_caption("DIMENSION 1: a\nDIMENSION 1: b\nDIMENSION 2: c", 2).ok());
  EXPECT_FALSE(parse_structured_caption("DIMENSION 1:\nDIMENSION 2: c", 2).ok());
}

class CaptionModes : public ::testing::TestWithParam<CaptionMode> {};

TEST_P(CaptionModes, MockCaptionHasAllDimensionsAndEnoughWords) {
  gateway::Gateway gw(testing::no_sleep_options());
  auto mock = std::make_shared<gateway::MockProvider>();
  gw.add_provider("captioner", mock);
  const auto templates = PromptTemplateSet::defaults();
  auto r = caption_t2i(gw, templates, blob(1024, 768), options(GetParam()));
  ASSERT_TRUE(r.ok()) << r.error().detail;
  const auto& c = r.value();
  ASSERT_EQ(c.dimensions.size(), 21u);
  for (std::size_t i = 0; i < 21; ++i) EXPECT_EQ(c.dimensions[i].name, templates.dimension_list[i].name);
  EXPECT_GE(c.word_count, 210u);
  EXPECT_EQ(c.word_count, audit::word_count(c.caption));
  EXPECT_EQ(c.mode, GetParam());
  EXPECT_EQ(LongCaption::from_json(c.to_json()), c);
  EXPECT_EQ(mock->call_count(), GetParam() == CaptionMode::Structured ? 1 : 21);
}

INSTANTIATE_TEST_SUITE_P(Both, CaptionModes, ::testing::Values(CaptionMode::Structured, CaptionMode::PerDimension),
                         [](const auto& info) { return info.param == CaptionMode::Structured ? "Structured" : "PerDimension"; });

TEST(Caption, SmallImageIsRejectedBeforeAnyCall) {
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  gw.add_provider("captioner", scripted);
  EXPECT_THROW(caption_t2i(gw, PromptTemplateSet::defaults(), blob(512, 900), options(CaptionMode::Structured)),
               PreconditionError);
  EXPECT_EQ(scripted->calls(), 0);
}

TEST(Caption, ModeNames) {
  EXPECT_EQ(parse_caption_mode(to_string(CaptionMode::PerDimension)), CaptionMode::PerDimension);
  EXPECT_THROW(parse_caption_mode("bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace dim::annotate
