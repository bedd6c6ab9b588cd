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
#include <fstream>

#include <gtest/gtest.h>

#include "dim/core/jsonl.hpp"
#include "dim/ingest/ingest.hpp"
#include "fixtures.hpp"

namespace dim::ingest {
namespace {

namespace fs = std::filesystem;

ManifestEntry entry(const std::string& id, const std::string& instruction,
                    std::map<std::string, std::string> meta = {}, int w = 640, int h = 640) {
  const std::string size = std::to_string(w) + "x" + std::to_string(h);
  return ManifestEntry{"syn:" + size + ":" + id + "/s", "syn:" + size + ":" + id + "/t", instruction,
                       std::move(meta)};
}

SourceManifest manifest(SourceDataset src, std::vector<ManifestEntry> entries) {
  SourceManifest m;
  m.source_dataset = std::move(src);
  m.declared_count = entries.size();
  m.entries = std::move(entries);
  return m;
}

void expect_accounted(const IngestReport& r) { EXPECT_EQ(r.kept + r.dropped(), r.read); }

TEST(Ingest, ResolutionGateIsStrict) {
  EXPECT_EQ(resolution_gate(513, 513), GateResult::Pass);
  EXPECT_EQ(resolution_gate(512, 1024), GateResult::TooSmall);
  EXPECT_EQ(resolution_gate(1024, 512), GateResult::TooSmall);
  EXPECT_EQ(resolution_gate(std::nullopt), GateResult::Unreadable);
}

TEST(Ingest, MagicBrushKeepsTrainSplitOnly) {
  testing::SyntheticImageSource images;
  auto m = manifest(SourceDataset::Kind::MagicBrush,
                    {entry("a", "add a dog", {{"split", "train"}}), entry("b", "add a cat", {{"split", "dev"}}),
                     entry("c", "add a cow")});
  auto r = ingest_source(m, SelectionRules::defaults(), images);
  EXPECT_EQ(r.report.kept, 1u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kSplit), 2u);
  expect_accounted(r.report);
}

TEST(Ingest, SeedRequiresWholeWordRemove) {
  testing::SyntheticImageSource images;
  auto m = manifest(SourceDataset::Kind::SeedEditPart3,
                    {entry("a", "Remove the lamp"), entry("b", "the lamp was removed"), entry("c", "add a lamp")});
  auto r = ingest_source(m, SelectionRules::defaults(), images);
  EXPECT_EQ(r.report.kept, 1u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kKeyword), 2u);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].raw_instruction, "Remove the lamp");

  auto rules = SelectionRules::defaults();
  rules.per_source[SourceDataset::Kind::SeedEditPart3].keyword_match = KeywordMatch::Substring;
  EXPECT_EQ(ingest_source(m, rules, images).report.kept, 2u);
}

TEST(Ingest, ShareGptSubset) {
  testing::SyntheticImageSource images;
  auto m = manifest(SourceDataset::Kind::ShareGPT4oImage,
                    {entry("a", "x", {{"subset", "image-to-image"}}), entry("b", "y", {{"subset", "text-to-image"}})});
  auto r = ingest_source(m, SelectionRules::defaults(), images);
  EXPECT_EQ(r.report.kept, 1u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kSubset), 1u);
}

TEST(Ingest, UnreadableAndSmallImagesAreCounted) {
  testing::SyntheticImageSource images;
  auto rules = SelectionRules::defaults();
  rules.per_source[SourceDataset::Kind::UltraEdit].resolution_gate = true;
  auto bad = entry("bad", "x");
  bad.target_image_ref = "missing.png";
  auto m = manifest(SourceDataset::Kind::UltraEdit, {entry("a", "x"), bad, entry("s", "x", {}, 512, 800)});
  auto r = ingest_source(m, rules, images);
  EXPECT_EQ(r.report.kept, 1u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kUnreadable), 1u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kResolution), 1u);
  expect_accounted(r.report);
}

TEST(Ingest, DuplicatesCollapseAndOrderIsStable) {
  testing::SyntheticImageSource images;
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 20; ++i) entries.push_back(entry(std::to_string(i % 15), "do it"));
  auto r = ingest_source(manifest(SourceDataset::Kind::UltraEdit, entries), SelectionRules::defaults(), images, 4);
  EXPECT_EQ(r.report.kept, 15u);
  EXPECT_EQ(r.report.dropped_by_rule.at(rule::kDuplicate), 5u);
  EXPECT_TRUE(std::is_sorted(r.pairs.begin(), r.pairs.end(),
                             [](const EditPair& a, const EditPair& b) { return a.pair_id < b.pair_id; }));
  auto again = ingest_source(manifest(SourceDataset::Kind::UltraEdit, entries), SelectionRules::defaults(), images, 1);
  EXPECT_EQ(again.pairs, r.pairs);
  for (const auto& p : r.pairs) {
    EXPECT_EQ(p.pair_id, stable_pair_id(p.source_image.ref, p.target_image.ref, p.raw_instruction));
    EXPECT_EQ(p.source_dataset.kind(), SourceDataset::Kind::UltraEdit);
  }
}

TEST(Ingest, ManifestDeclaredCountMismatchIsRejected) {
  auto m = manifest(SourceDataset::Kind::UltraEdit, {entry("a", "x")});
  auto j = m.to_json();
  EXPECT_EQ(SourceManifest::from_json(j).entries.size(), 1u);
  j["declared_count"] = 2;
  EXPECT_THROW(SourceManifest::from_json(j), ManifestError);
  EXPECT_THROW(SourceManifest::from_json(nlohmann::json::array()), ManifestError);
}

TEST(Ingest, RulesJsonRoundTrip) {
  auto rules = SelectionRules::defaults();
  auto back = SelectionRules::from_json(rules.to_json());
  EXPECT_EQ(back.per_source, rules.per_source);
  EXPECT_EQ(rules.rule_for(SourceDataset::other("unknown")), nullptr);
}

TEST(Ingest, MixtureTotals) {
  IngestReport a{SourceDataset::Kind::UltraEdit, 10, 7, {{rule::kDuplicate, 3}}};
  IngestReport b{SourceDataset::Kind::MagicBrush, 5, 5, {}};
  auto m = mixture_totals({a, b});
  EXPECT_EQ(m.total, 12u);
  EXPECT_EQ(m.kept.at(SourceDataset::Kind::UltraEdit), 7u);
  EXPECT_THROW(mixture_totals({a, a}), std::invalid_argument);
}

TEST(Ingest, ManifestFromDirectory) {
  auto dir = fs::temp_directory_path() / ("dim-unit-mfd-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto img = testing::png(8, 8, std::vector<std::uint8_t>(8 * 8 * 3, 100));
  for (std::string stem : {"b", "a"}) {
    atomic_write_file(dir / (stem + "_source.png"), img);
    atomic_write_file(dir / (stem + "_target.png"), img);
    atomic_write_file(dir / (stem + ".txt"), "make it " + stem + "\n");
  }
  atomic_write_file(dir / "c_source.png", img);  // incomplete stem
  auto m = manifest_from_dir(dir, SourceDataset::Kind::MagicBrush, {{"split", "train"}});
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].raw_instruction, "make it a");
  EXPECT_EQ(m.entries[1].extra_metadata.at("split"), "train");
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dim::ingest
