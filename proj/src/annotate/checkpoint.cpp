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

#include "dim/annotate/checkpoint.hpp"

#include "dim/core/jsonl.hpp"

namespace dim::annotate {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Pending: return "Pending";
    case Stage::Verdicted: return "Verdicted";
    case Stage::Optimized: return "Optimized";
    case Stage::CoTDone: return "CoTDone";
    case Stage::Discarded: return "Discarded";
    case Stage::Failed: return "Failed";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : {Stage::Pending, Stage::Verdicted, Stage::Optimized, Stage::CoTDone,
                   Stage::Discarded, Stage::Failed}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

Json PairState::to_json() const {
  Json j{{"pair_id", pair_id}, {"stage", to_string(stage)}, {"provider_asks", provider_asks}};
  if (verdict) j["verdict"] = encode(*verdict);
  if (optimized_instruction) j["optimized_instruction"] = *optimized_instruction;
  if (blueprint) j["blueprint"] = encode(*blueprint);
  if (!created_at.empty()) j["created_at"] = created_at;
  if (stage == Stage::Failed) {
    j["failure_reason"] = failure_reason;
    j["failed_from"] = to_string(failed_from);
  }
  return j;
}

PairState PairState::from_json(const Json& j) {
  try {
    PairState s;
    s.pair_id = j.at("pair_id").get<std::string>();
    auto stage = parse_stage(j.at("stage").get<std::string>());
    if (!stage) throw FormatError("unknown stage");
    s.stage = *stage;
    s.provider_asks = j.value("provider_asks", 0);
    if (j.contains("verdict")) s.verdict = decode<AlignmentVerdict>(j.at("verdict"));
    if (j.contains("optimized_instruction"))
      s.optimized_instruction = j.at("optimized_instruction").get<std::string>();
    if (j.contains("blueprint")) s.blueprint = decode<BlueprintCoT>(j.at("blueprint"));
    s.created_at = j.value("created_at", "");
    if (s.stage == Stage::Failed) {
      s.failure_reason = j.at("failure_reason").get<std::string>();
      auto from = parse_stage(j.at("failed_from").get<std::string>());
      if (!from || is_terminal(*from)) throw FormatError("bad failed_from");
      s.failed_from = *from;
    }
    return s;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint entry: ") + e.what());
  }
}

bool transition_allowed(const PairState& from, Stage to) {
  switch (from.stage) {
    case Stage::Pending: return to == Stage::Verdicted || to == Stage::Failed;
    case Stage::Verdicted:
      if (to == Stage::Discarded) return from.verdict && from.verdict->verdict == Verdict::Misaligned;
      if (to == Stage::Optimized) return from.verdict && from.verdict->verdict != Verdict::Misaligned;
      return to == Stage::Failed;
    case Stage::Optimized: return to == Stage::CoTDone || to == Stage::Failed;
    case Stage::CoTDone:
    case Stage::Discarded:
    case Stage::Failed: return false;
  }
  return false;
}

CheckpointStore::CheckpointStore(const fs::path& dir, const std::string& pipeline_version)
    : dir_(dir) {
  fs::create_directories(dir_);
  const fs::path meta = dir_ / kMeta;
  if (fs::exists(meta)) {
    Json j;
    try {
      j = Json::parse(read_file(meta));
    } catch (const Json::exception& e) {
      throw CheckpointError(meta.string() + ": " + e.what());
    }
    const auto recorded = j.value("pipeline_version", "");
    if (recorded != pipeline_version)
      throw CheckpointError("checkpoint " + dir_.string() + " was written by pipeline " + recorded +
                            ", this run is " + pipeline_version);
  } else {
    atomic_write_file(meta, with_schema_version(Json{{"pipeline_version", pipeline_version}}).dump() + "\n");
  }

  const fs::path journal = dir_ / kJournal;
  if (fs::exists(journal)) {
    const std::string body = read_file(journal);
    std::size_t pos = 0, line_no = 0, good_end = 0;
    while (pos < body.size()) {
      const auto nl = body.find('\n', pos);
      ++line_no;
      if (nl == std::string::npos) {
        // Final line without its newline: a write that did not finish.
        dropped_torn_line_ = true;
        break;
      }
      const std::string_view line(body.data() + pos, nl - pos);
      if (!line.empty()) {
        try {
          Json j = Json::parse(line);
          check_schema_version(j);
          PairState s = PairState::from_json(j);
          states_[s.pair_id] = std::move(s);
        } catch (const std::exception& e) {
          throw CheckpointError(journal.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
      }
      pos = nl + 1;
      good_end = pos;
    }
    if (dropped_torn_line_) fs::resize_file(journal, good_end);
  }
  out_.open(journal, std::ios::app | std::ios::binary);
  if (!out_) throw CheckpointError("cannot open " + journal.string() + " for append");
}

std::optional<PairState> CheckpointStore::get(const std::string& pair_id) const {
  std::lock_guard lock(mu_);
  auto it = states_.find(pair_id);
  if (it == states_.end()) return std::nullopt;
  return it->second;
}

void CheckpointStore::append(const PairState& s) {
  out_ << with_schema_version(s.to_json()).dump() << '\n';
  out_.flush();
  if (!out_) throw CheckpointError("write to checkpoint journal failed");
  states_[s.pair_id] = s;
}

void CheckpointStore::record(const PairState& next) {
  std::lock_guard lock(mu_);
  auto it = states_.find(next.pair_id);
  PairState current;
  current.pair_id = next.pair_id;
  if (it != states_.end()) current = it->second;
  if (!transition_allowed(current, next.stage))
    throw std::logic_error("illegal stage transition for " + next.pair_id + ": " +
                           std::string(to_string(current.stage)) + " -> " +
                           std::string(to_string(next.stage)));
  append(next);
}

void CheckpointStore::reset_failed(const std::string& pair_id) {
  std::lock_guard lock(mu_);
  auto it = states_.find(pair_id);
  if (it == states_.end() || it->second.stage != Stage::Failed) return;
  PairState s = it->second;
  s.stage = s.failed_from;
  s.failure_reason.clear();
  s.failed_from = Stage::Pending;
  append(s);
}

std::map<Stage, std::size_t> CheckpointStore::counts() const {
  std::lock_guard lock(mu_);
  std::map<Stage, std::size_t> out;
  for (const auto& [_, s] : states_) ++out[s.stage];
  return out;
}

std::size_t CheckpointStore::size() const {
  std::lock_guard lock(mu_);
  return states_.size();
}

}  // namespace dim::annotate
