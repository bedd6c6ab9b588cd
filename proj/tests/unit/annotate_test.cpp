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

#include <filesystem>

#include <gtest/gtest.h>

#include "dim/core/digest.hpp"
#include "dim/core/jsonl.hpp"
#include "dim/annotate/grammar.hpp"
#include "dim/annotate/pipeline.hpp"
#include "dim/annotate/templates.hpp"
#include "dim/gateway/mock_provider.hpp"
#include "dim/gateway/structured.hpp"
#include "fixtures.hpp"

namespace dim::annotate {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dim-unit-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

const char* kCot =
    "INSTRUCTION: ignored\n"
    "STEP 1: GLOBAL LAYOUT PERCEPTION\nA kitchen.\n"
    "STEP 2: LOCAL OBJECT PERCEPTION\nA kettle on the stove.\n"
    "STEP 3: EDIT AREA LOCALIZATION\nThe stove, centre right.\n"
    "STEP 4: EDITED IMAGE IMAGINATION\nThe kettle is now copper.\n";

// Real PNG-backed pairs, so digests line up with what the annotator loads.
struct World {
  testing::MemoryImageSource images;
  std::vector<simfilter::ScoredPair> pairs;

  void add(const std::string& instruction, int variant) {
    auto s = testing::png(16, 16, testing::scene_rgb(16, 16, variant));
    auto t = testing::png(16, 16, testing::scene_rgb(16, 16, variant + 100));
    EditPair p;
    p.source_image = {"s" + std::to_string(variant), 16, 16, sha256_hex(s)};
    p.target_image = {"t" + std::to_string(variant), 16, 16, sha256_hex(t)};
    p.raw_instruction = instruction;
    p.pair_id = stable_pair_id(s, t, instruction);
    p.source_dataset = SourceDataset::Kind::MagicBrush;
    images.put(p.source_image.ref, s);
    images.put(p.target_image.ref, t);
    pairs.push_back({p, FilterScores{}});
  }
};

AnnotateOptions options() {
  AnnotateOptions o;
  o.provider_tag = "annotator";
  o.model_tag = "judge-model";
  o.workers = 3;
  o.created_at = "2026-02-03T04:05:06Z";
  return o;
}

TEST(Templates, DefaultsValidateAndRoundTripThroughDisk) {
  auto t = PromptTemplateSet::defaults();
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.dimension_list.size(), 21u);
  auto dir = scratch("tpl");
  t.write(dir);
  EXPECT_EQ(PromptTemplateSet::load(dir), t);
  atomic_write_file(dir / "verdict.txt", "no slots here");
  EXPECT_THROW(PromptTemplateSet::load(dir), TemplateError);
  fs::remove_all(dir);
}

TEST(Templates, HashTracksAnnotationTemplatesOnly) {
  auto a = PromptTemplateSet::defaults();
  auto b = a;
  b.audit_tier += "\nBe strict.";
  b.judge_gedit11 += " ";
  EXPECT_EQ(a.annotation_hash(), b.annotation_hash());
  b.cot_generation += "\nBe concise.";
  EXPECT_NE(a.annotation_hash(), b.annotation_hash());
  EXPECT_NE(a.pipeline_version(), b.pipeline_version());
  EXPECT_NE(a.pipeline_version().find("+tpl."), std::string::npos);
}

TEST(Templates, FillReplacesKnownKeysOnly) {
  EXPECT_EQ(fill("{a} and {b} and {c", {{"a", "1"}, {"b", "{a}"}}), "1 and {a} and {c");
  EXPECT_NE(describe_images(true), describe_images(false));
}

TEST(Grammar, Verdicts) {
  auto v = parse_verdict_response("The edit misses the hat.\nVERDICT: PartiallyAligned", "j");
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v.value().verdict, Verdict::PartiallyAligned);
  EXPECT_EQ(v.value().rationale, "The edit misses the hat.");
  EXPECT_EQ(v.value().judge_model, "j");
  EXPECT_TRUE(parse_verdict_response("**Verdict:** aligned", "j").ok());
  EXPECT_FALSE(parse_verdict_response("looks fine to me", "j").ok());
  EXPECT_FALSE(parse_verdict_response("VERDICT: Aligned\nVERDICT: Misaligned", "j").ok());
  EXPECT_FALSE(parse_verdict_response("VERDICT: Mostly", "j").ok());
}

TEST(Grammar, OptimizedInstruction) {
  EXPECT_EQ(parse_optimized_response("Instruction: \"Add a red hat\"").value(), "Add a red hat");
  EXPECT_EQ(parse_optimized_response("  Put the cup on the left  ").value(), "Put the cup on the left");
  EXPECT_FALSE(parse_optimized_response("Instruction: \"\"").ok());
  EXPECT_FALSE(parse_optimized_response("   ").ok());
}

TEST(Grammar, CotOverridesInstruction) {
  auto bp = parse_cot_response(kCot, "gen", std::string("Make the kettle copper"));
  ASSERT_TRUE(bp.ok());
  EXPECT_EQ(bp.value().optimized_instruction(), "Make the kettle copper");
  EXPECT_EQ(bp.value().generator_model(), "gen");
  auto bad = parse_cot_response("STEP 1: GLOBAL LAYOUT PERCEPTION\nx", "gen", std::nullopt);
  ASSERT_FALSE(bad.ok());
  EXPECT_TRUE(bad.error().has(ViolationKind::MissingInstruction));
  EXPECT_TRUE(bad.error().has(ViolationKind::MissingStep));
}

TEST(Structured, ReasksWithCorrectiveTurn) {
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_text("I think it is fine");
  scripted->push([](const gateway::ProviderRequest& r) {
    EXPECT_EQ(r.messages.size(), 3u);
    EXPECT_EQ(r.messages[1].role, "assistant");
    EXPECT_NE(r.messages[2].text.find("could not be used"), std::string::npos);
    return std::string("VERDICT: Aligned");
  });
  gw.add_provider("p", scripted);
  gateway::ProviderRequest req;
  req.provider_tag = "p";
  req.model_tag = "m";
  req.purpose = "verdict";
  req.messages.push_back({"user", "judge", {}});
  auto out = gateway::ask_structured<AlignmentVerdict>(
      gw, req, "ns", 2, [](const std::string& t) { return parse_verdict_response(t, "m"); });
  ASSERT_TRUE(out.value.has_value());
  EXPECT_EQ(out.asks, 2);
}

TEST(Pipeline, MisalignedIsDiscardedWithoutFurtherCalls) {
  World w;
  w.add("add a hat", 1);
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_text("Wrong object edited.\nVERDICT: Misaligned");
  gw.add_provider("annotator", scripted);
  CheckpointStore store(scratch("ckpt-mis"), PromptTemplateSet::defaults().pipeline_version());
  Annotator ann(gw, PromptTemplateSet::defaults(), w.images, options());
  auto run = ann.run(w.pairs, store);
  EXPECT_EQ(run.summary.count(Stage::Discarded), 1u);
  EXPECT_TRUE(run.records.empty());
  EXPECT_EQ(scripted->calls(), 1);
}

TEST(Pipeline, PartiallyAlignedFlowsThroughOptimizationToRecord) {
  World w;
  w.add("make kettle shiny", 2);
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_text("Material changed but colour unclear.\nVERDICT: PartiallyAligned");
  scripted->push_text("Instruction: Make the kettle copper");
  scripted->push_text(kCot);
  auto rec = std::make_shared<testing::RecordingProvider>(scripted);
  gw.add_provider("annotator", rec);
  CheckpointStore store(scratch("ckpt-pa"), PromptTemplateSet::defaults().pipeline_version());
  Annotator ann(gw, PromptTemplateSet::defaults(), w.images, options());
  auto run = ann.run(w.pairs, store);
  ASSERT_EQ(run.records.size(), 1u);
  const auto& r = run.records[0];
  EXPECT_EQ(r.verdict().verdict, Verdict::PartiallyAligned);
  EXPECT_EQ(r.blueprint().optimized_instruction(), "Make the kettle copper");
  EXPECT_EQ(r.created_at(), "2026-02-03T04:05:06Z");
  EXPECT_EQ(r.pipeline_version(), ann.pipeline_version());
  auto seen = rec->requests();
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0].purpose, "verdict");
  EXPECT_EQ(seen[1].purpose, "optimize_partial");
  EXPECT_NE(seen[1].messages.back().text.find("colour unclear"), std::string::npos);
  EXPECT_EQ(seen[2].purpose, "cot");
  EXPECT_EQ(seen[2].image_count(), 2u);
}

TEST(Pipeline, UnparseableVerdictFailsAfterBudget) {
  World w;
  w.add("add a hat", 3);
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  for (int i = 0; i < 3; ++i) scripted->push_text("no idea");
  gw.add_provider("annotator", scripted);
  CheckpointStore store(scratch("ckpt-fail"), PromptTemplateSet::defaults().pipeline_version());
  Annotator ann(gw, PromptTemplateSet::defaults(), w.images, options());
  auto run = ann.run(w.pairs, store);
  ASSERT_EQ(run.summary.failed.size(), 1u);
  EXPECT_EQ(run.summary.failed[0].second, failure::kUnparseableVerdict);
  EXPECT_EQ(scripted->calls(), 3);
  EXPECT_TRUE(run.summary.partitioned());
}

TEST(Pipeline, ProviderErrorAndMissingImageBecomeFailures) {
  World w;
  w.add("add a hat", 4);
  w.add("add a scarf", 5);
  w.images.put(w.pairs[1].pair.target_image.ref, "tampered bytes");
  gateway::Gateway gw(testing::no_sleep_options());
  auto scripted = std::make_shared<testing::ScriptedProvider>();
  scripted->push_error(gateway::ErrorKind::Auth);
  gw.add_provider("annotator", scripted);
  CheckpointStore store(scratch("ckpt-err"), PromptTemplateSet::defaults().pipeline_version());
  auto opts = options();
  opts.workers = 1;
  Annotator ann(gw, PromptTemplateSet::defaults(), w.images, opts);
  auto run = ann.run(w.pairs, store);
  EXPECT_EQ(run.summary.count(Stage::Failed), 2u);
  std::set<std::string> reasons;
  for (const auto& f : run.summary.failed) reasons.insert(f.second);
  EXPECT_TRUE(reasons.count("provider_error:auth"));
  EXPECT_TRUE(reasons.count(failure::kImageUnavailable));
}

TEST(Pipeline, MockRunPartitionsAndResumesWithoutCalls) {
  World w;
  for (int i = 0; i < 30; ++i) w.add("edit number " + std::to_string(i) + (i % 10 == 0 ? " [[mock-fail]]" : ""), i);
  auto dir = scratch("ckpt-mock");
  const auto templates = PromptTemplateSet::defaults();
  auto mock = std::make_shared<gateway::MockProvider>();
  AnnotateRun first;
  {
    gateway::Gateway gw(testing::no_sleep_options());
    gw.add_provider("annotator", mock);
    CheckpointStore store(dir, templates.pipeline_version());
    first = Annotator(gw, templates, w.images, options()).run(w.pairs, store);
  }
  EXPECT_TRUE(first.summary.partitioned());
  EXPECT_EQ(first.summary.input, 30u);
  EXPECT_GE(first.summary.count(Stage::Failed), 3u);
  EXPECT_GT(first.records.size(), 0u);
  const auto calls = mock->call_count();

  gateway::Gateway gw(testing::no_sleep_options());
  gw.add_provider("annotator", mock);
  CheckpointStore store(dir, templates.pipeline_version());
  auto second = Annotator(gw, templates, w.images, options()).run(w.pairs, store);
  EXPECT_EQ(mock->call_count(), calls);
  EXPECT_EQ(gw.cost_report("annotate").requests, 0);
  ASSERT_EQ(second.records.size(), first.records.size());
  for (std::size_t i = 0; i < first.records.size(); ++i) EXPECT_EQ(second.records[i], first.records[i]);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dim::annotate
