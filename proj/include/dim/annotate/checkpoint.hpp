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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dim/core/blueprint.hpp"
#include "dim/core/serialize.hpp"
#include "dim/core/types.hpp"

namespace dim::annotate {

enum class Stage { Pending, Verdicted, Optimized, CoTDone, Discarded, Failed };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);
inline bool is_terminal(Stage s) {
  return s == Stage::CoTDone || s == Stage::Discarded || s == Stage::Failed;
}

struct PairState {
  std::string pair_id;
  Stage stage = Stage::Pending;
  std::optional<AlignmentVerdict> verdict;
  std::optional<std::string> optimized_instruction;
  std::optional<BlueprintCoT> blueprint;
  std::string created_at;       // set at CoTDone
  std::string failure_reason;   // set at Failed
  Stage failed_from = Stage::Pending;
  int provider_asks = 0;        // cumulative over every stage and re-ask

  bool operator==(const PairState&) const = default;
  Json to_json() const;
  static PairState from_json(const Json& j);
};

// Pending -> Verdicted -> Optimized -> CoTDone; Verdicted -> Discarded only
// for a Misaligned verdict; any non-terminal stage -> Failed.
bool transition_allowed(const PairState& from, Stage to);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only journal of pair states. The last entry per pair wins, so an
// update is one appended line. A torn final line (crash mid-write) is
// dropped on open.
class CheckpointStore {
 public:
  static constexpr const char* kJournal = "journal.jsonl";
  static constexpr const char* kMeta = "meta.json";

  // Throws CheckpointError when the directory was written under another
  // pipeline version or the journal is corrupt.
  CheckpointStore(const std::filesystem::path& dir, const std::string& pipeline_version);

  std::optional<PairState> get(const std::string& pair_id) const;
  // Throws std::logic_error on a transition that transition_allowed rejects.
  void record(const PairState& next);
  // Moves a Failed pair back to the stage it failed from.
  void reset_failed(const std::string& pair_id);

  std::map<Stage, std::size_t> counts() const;
  std::size_t size() const;
  bool dropped_torn_line() const { return dropped_torn_line_; }

 private:
  void append(const PairState& s);

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, PairState> states_;
  std::ofstream out_;
  bool dropped_torn_line_ = false;
};

}  // namespace dim::annotate
