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

#include "dim/eval/eval.hpp"
#include "dim/gateway/mock_provider.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace dim::eval {
namespace {

std::vector<JudgeScore> scores_from_row(const oracle::TableRow& row, BenchmarkStyle style) {
  std::vector<JudgeScore> out;
  const auto& tags = task_tags(style);
  for (std::size_t i = 0; i < tags.size(); ++i)
    out.push_back(JudgeScore{"s" + std::to_string(i), tags[i], row.cells[i], scale_max(style), "j", {}, {}});
  return out;
}

const oracle::TableRow& row_named(const std::vector<oracle::TableRow>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.model == name) return r;
  throw std::out_of_range(name);
}

TEST(Eval, TaskTagsAndScales) {
  EXPECT_EQ(task_tags(BenchmarkStyle::ImgEdit9).size(), 9u);
  EXPECT_EQ(task_tags(BenchmarkStyle::GEditEN11).size(), 11u);
  EXPECT_EQ(task_tags(BenchmarkStyle::GEditEN11)[9], "TC");
  EXPECT_EQ(scale_max(BenchmarkStyle::ImgEdit9), 5.0);
  EXPECT_EQ(scale_max(BenchmarkStyle::GEditEN11), 10.0);
  EXPECT_EQ(parse_style("gedit"), BenchmarkStyle::GEditEN11);
  EXPECT_THROW(parse_style("mmlu"), std::invalid_argument);
}

TEST(Eval, ImgEditRowReproducesPrintedOverall) {
  const auto& row = row_named(oracle::imgedit_table(), "DIM-4.6B-Edit");
  auto r = aggregate(scores_from_row(row, BenchmarkStyle::ImgEdit9), BenchmarkStyle::ImgEdit9);
  EXPECT_NEAR(r.overall, row.printed_overall, 0.005);
  EXPECT_TRUE(r.absent_tasks.empty());
  EXPECT_NE(r.to_table("DIM").find("Overall"), std::string::npos);
}

TEST(Eval, GEditRowReproducesBothAverages) {
  const auto& row = row_named(oracle::gedit_table(), "DIM-4.6B-Edit");
  auto r = aggregate(scores_from_row(row, BenchmarkStyle::GEditEN11), BenchmarkStyle::GEditEN11);
  EXPECT_NEAR(r.overall, 6.18, 0.005);
  EXPECT_NEAR(r.overall_excluding.at("TC"), 6.50, 0.005);
  auto table = r.to_table("DIM");
  EXPECT_NE(table.find("AVG w/o TC"), std::string::npos);
  EXPECT_NE(table.find("6.50"), std::string::npos);
}

TEST(Eval, MeansArePerTaskThenAcrossTasks) {
  std::vector<JudgeScore> s{{"a", "Add", 5.0, 5.0, "j", {}, {}},
                            {"b", "Add", 3.0, 5.0, "j", {}, {}},
                            {"c", "Remove", 1.0, 5.0, "j", {}, {}}};
  auto r = aggregate(s, BenchmarkStyle::ImgEdit9);
  EXPECT_DOUBLE_EQ(r.task_means.at("Add"), 4.0);
  EXPECT_DOUBLE_EQ(r.overall, 2.5);
  EXPECT_EQ(r.absent_tasks.size(), 7u);
  s.push_back({"d", "Dance", 1.0, 5.0, "j", {}, {}});
  EXPECT_THROW(aggregate(s, BenchmarkStyle::ImgEdit9), std::invalid_argument);
  s.back() = {"d", "Add", 6.0, 5.0, "j", {}, {}};
  EXPECT_THROW(aggregate(s, BenchmarkStyle::ImgEdit9), std::invalid_argument);
}

TEST(Eval, ParseJudgeResponses) {
  EvalSample sample{"x", "BC", "s", "i", "e"};
  auto r = parse_judge_response("SC: 8\nPQ: 6\nSCORE: 6.9", BenchmarkStyle::GEditEN11, sample, "j");
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r.value().score, 6.9);
  EXPECT_EQ(r.value().semantic_consistency, 8.0);
  EXPECT_EQ(r.value().task, "BC");
  EXPECT_FALSE(parse_judge_response("SCORE: 11", BenchmarkStyle::GEditEN11, sample, "j").ok());
  sample.task = "Add";
  EXPECT_FALSE(parse_judge_response("SCORE: 5.5", BenchmarkStyle::ImgEdit9, sample, "j").ok());
  EXPECT_FALSE(parse_judge_response("great edit", BenchmarkStyle::ImgEdit9, sample, "j").ok());
}

TEST(Eval, SubmissionValidation) {
  Json j{{"benchmark_style", "imgedit9"},
         {"samples", Json::array({Json{{"sample_id", "a"}, {"task", "Add"}, {"source_image", "s"},
                                       {"instruction", "i"}, {"edited_image", "e"}}})}};
  auto sub = EvalSubmission::from_json(j);
  EXPECT_EQ(sub.samples.size(), 1u);
  EXPECT_EQ(EvalSubmission::from_json(sub.to_json()).samples, sub.samples);
  auto dup = j;
  dup["samples"].push_back(dup["samples"][0]);
  EXPECT_THROW(EvalSubmission::from_json(dup), FormatError);
  auto bad = j;
  bad["samples"][0]["task"] = "BC";
  EXPECT_THROW(EvalSubmission::from_json(bad), FormatError);
}

TEST(Eval, MockJudgeScoresInRange) {
  testing::MemoryImageSource images;
  auto png = testing::png(8, 8, testing::scene_rgb(8, 8, 1));
  images.put("s", png);
  images.put("e", png);
  gateway::Gateway gw(testing::no_sleep_options());
  gw.add_provider("judge", std::make_shared<gateway::MockProvider>());
  JudgeOptions o;
  o.judge_tag = "judge";
  o.model_tag = "judge-model";
  for (auto style : {BenchmarkStyle::ImgEdit9, BenchmarkStyle::GEditEN11}) {
    EvalSample sample{"x", task_tags(style)[0], "s", "add a hat", "e"};
    auto r = judge_sample(gw, sample, style, images, annotate::PromptTemplateSet::defaults(), o);
    ASSERT_TRUE(r.ok()) << r.error();
    EXPECT_GE(r.value().score, 0.0);
    EXPECT_LE(r.value().score, scale_max(style));
  }
}

}  // namespace
}  // namespace dim::eval
