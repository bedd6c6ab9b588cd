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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dim/core/image.hpp"
#include "dim/core/types.hpp"

namespace dim::ingest {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string source_image_ref;
  std::string target_image_ref;
  std::string raw_instruction;
  std::map<std::string, std::string> extra_metadata;  // e.g. split, subset
};

struct SourceManifest {
  SourceDataset source_dataset;
  std::vector<ManifestEntry> entries;
  std::size_t declared_count = 0;

  // Throws ManifestError on malformed input or a declared_count mismatch.
  static SourceManifest from_json(const nlohmann::json& j);
  static SourceManifest load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Drop reasons recorded in reports.
namespace rule {
inline constexpr const char* kUnreadable = "unreadable";
inline constexpr const char* kSplit = "split_restriction";
inline constexpr const char* kKeyword = "keyword_miss";
inline constexpr const char* kSubset = "subset_mismatch";
inline constexpr const char* kResolution = "resolution";
inline constexpr const char* kDuplicate = "duplicate";
}  // namespace rule

enum class KeywordMatch { WholeWord, Substring };

struct SourceRule {
  std::optional<std::string> split;             // metadata "split" must equal this
  std::optional<std::string> required_keyword;  // must occur in raw_instruction
  KeywordMatch keyword_match = KeywordMatch::WholeWord;
  std::optional<std::string> subset;            // metadata "subset" must equal this
  bool resolution_gate = false;                 // both images must pass resolution_gate

  bool operator==(const SourceRule&) const = default;
};

struct SelectionRules {
  std::map<SourceDataset, SourceRule> per_source;

  // MagicBrush train split only; SEED instructions containing the word
  // "remove"; ShareGPT-4o-Image image-to-image subset; no ingest rule for
  // UltraEdit (its gate is the similarity filter).
  static SelectionRules defaults();
  static SelectionRules from_json(const nlohmann::json& j);
  static SelectionRules load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const SourceRule* rule_for(const SourceDataset& s) const;
};

struct IngestReport {
  SourceDataset source;
  std::size_t read = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped_by_rule;

  std::size_t dropped() const;
  nlohmann::json to_json() const;
};

struct IngestResult {
  std::vector<EditPair> pairs;  // sorted by pair_id
  IngestReport report;
};

// Applies the source's rule to every entry, loads both images, assigns
// content-derived ids and drops duplicates. Every entry is accounted for
// exactly once in the report.
IngestResult ingest_source(const SourceManifest& manifest, const SelectionRules& rules,
                           const ImageSource& images, std::size_t workers = 1);

enum class GateResult { Pass, TooSmall, Unreadable };
std::string_view to_string(GateResult g);

// Pass iff width > 512 and height > 512. A missing image is Unreadable.
GateResult resolution_gate(const std::optional<ImageBlob>& image);
GateResult resolution_gate(int width, int height);

struct MixtureSummary {
  std::map<SourceDataset, std::size_t> kept;
  std::size_t total = 0;

  nlohmann::json to_json() const;
};

// Throws std::invalid_argument when a source appears twice.
MixtureSummary mixture_totals(const std::vector<IngestReport>& reports);

// Builds a manifest from a directory laid out as <stem>_source.<ext>,
// <stem>_target.<ext> and <stem>.txt (the instruction). Entries are ordered
// by stem; stems missing any of the three files are skipped.
SourceManifest manifest_from_dir(const std::filesystem::path& dir, const SourceDataset& source,
                                 const std::map<std::string, std::string>& metadata = {});

}  // namespace dim::ingest
