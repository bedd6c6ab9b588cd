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

#include "dim/annotate/checkpoint.hpp"
#include "dim/core/jsonl.hpp"
#include "fixtures.hpp"

namespace dim::annotate {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dim-unit-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

PairState verdicted(const std::string& id, Verdict v) {
  PairState s;
  s.pair_id = id;
  s.stage = Stage::Verdicted;
  s.verdict = AlignmentVerdict{v, "r", "j", "VERDICT: x"};
  s.provider_asks = 1;
  return s;
}

TEST(Checkpoint, TransitionTable) {
  PairState p;
  p.pair_id = "a";
  EXPECT_TRUE(transition_allowed(p, Stage::Verdicted));
  EXPECT_TRUE(transition_allowed(p, Stage::Failed));
  EXPECT_FALSE(transition_allowed(p, Stage::CoTDone));
  EXPECT_FALSE(transition_allowed(p, Stage::Discarded));
  auto mis = verdicted("a", Verdict::Misaligned);
  EXPECT_TRUE(transition_allowed(mis, Stage::Discarded));
  EXPECT_FALSE(transition_allowed(mis, Stage::Optimized));
  auto ok = verdicted("a", Verdict::Aligned);
  EXPECT_FALSE(transition_allowed(ok, Stage::Discarded));
  EXPECT_TRUE(transition_allowed(ok, Stage::Optimized));
  ok.stage = Stage::CoTDone;
  EXPECT_FALSE(transition_allowed(ok, Stage::Failed));
}

TEST(Checkpoint, PersistsAndReloads) {
  auto dir = scratch("ck1");
  {
    CheckpointStore store(dir, "v1");
    store.record(verdicted("a", Verdict::Aligned));
    auto next = verdicted("a", Verdict::Aligned);
    next.stage = Stage::Optimized;
    next.optimized_instruction = "Add a hat";
    store.record(next);
    store.record(verdicted("b", Verdict::Misaligned));
    EXPECT_THROW(store.record([] {
      auto s = verdicted("b", Verdict::Misaligned);
      s.stage = Stage::CoTDone;
      return s;
    }()), std::logic_error);
  }
  CheckpointStore store(dir, "v1");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.get("a")->stage, Stage::Optimized);
  EXPECT_EQ(store.get("a")->optimized_instruction, "Add a hat");
  EXPECT_FALSE(store.get("zzz").has_value());
  EXPECT_EQ(store.counts().at(Stage::Verdicted), 1u);
  fs::remove_all(dir);
}

TEST(Checkpoint, TornFinalLineIsDropped) {
  auto dir = scratch("ck2");
  {
    CheckpointStore store(dir, "v1");
    store.record(verdicted("a", Verdict::Aligned));
    store.record(verdicted("b", Verdict::Aligned));
  }
  {
    std::ofstream out(dir / CheckpointStore::kJournal, std::ios::app | std::ios::binary);
    out << R"({"schema_version":"1.0","pair_id":"c","sta)";
  }
  {
    CheckpointStore store(dir, "v1");
    EXPECT_TRUE(store.dropped_torn_line());
    EXPECT_EQ(store.size(), 2u);
    store.record(verdicted("c", Verdict::Aligned));
  }
  CheckpointStore store(dir, "v1");
  EXPECT_FALSE(store.dropped_torn_line());
  EXPECT_EQ(store.size(), 3u);
  fs::remove_all(dir);
}

TEST(Checkpoint, CorruptMiddleLineIsAnError) {
  auto dir = scratch("ck3");
  {
    CheckpointStore store(dir, "v1");
    store.record(verdicted("a", Verdict::Aligned));
  }
  auto text = read_file(dir / CheckpointStore::kJournal);
  atomic_write_file(dir / CheckpointStore::kJournal, "garbage\n" + text);
  EXPECT_THROW(CheckpointStore(dir, "v1"), CheckpointError);
  fs::remove_all(dir);
}

TEST(Checkpoint, VersionMismatchRefusesToResume) {
  auto dir = scratch("ck4");
  { CheckpointStore store(dir, "v1"); }
  EXPECT_THROW(CheckpointStore(dir, "v2"), CheckpointError);
  fs::remove_all(dir);
}

TEST(Checkpoint, ResetFailedReturnsToPreviousStage) {
  auto dir = scratch("ck5");
  CheckpointStore store(dir, "v1");
  auto s = verdicted("a", Verdict::Aligned);
  store.record(s);
  s.failed_from = Stage::Verdicted;
  s.stage = Stage::Failed;
  s.failure_reason = "empty_optimization";
  store.record(s);
  store.reset_failed("a");
  EXPECT_EQ(store.get("a")->stage, Stage::Verdicted);
  EXPECT_TRUE(store.get("a")->failure_reason.empty());
  fs::remove_all(dir);
}

TEST(Checkpoint, StateJsonRoundTrip) {
  auto s = verdicted("a", Verdict::PartiallyAligned);
  s.stage = Stage::CoTDone;
  s.optimized_instruction = "x";
  s.blueprint = testing::make_blueprint("x", {"a", "b", "c", "d"});
  s.created_at = "2026-01-01T00:00:00Z";
  EXPECT_EQ(PairState::from_json(s.to_json()), s);
  for (auto st : {Stage::Pending, Stage::Verdicted, Stage::Optimized, Stage::CoTDone, Stage::Discarded, Stage::Failed})
    EXPECT_EQ(parse_stage(to_string(st)), st);
}

}  // namespace
}  // namespace dim::annotate
