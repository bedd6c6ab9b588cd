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

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dim/core/image.hpp"
#include "dim/core/types.hpp"
#include "dim/simfilter/embedding.hpp"
#include "dim/simfilter/ssim.hpp"

namespace dim::simfilter {

// Consistency gate for machine-generated edit pairs. Every comparison is a
// strict "greater than"; a score equal to its threshold is dropped.
struct FilterPolicy {
  double clip_min = 0.9;
  double dino_min = 0.9;
  double ssim_min = 0.8;
  std::vector<std::string> forbidden_keywords{"rainbow"};
  std::set<SourceDataset> applies_to{SourceDataset::Kind::UltraEdit};

  // Throws std::invalid_argument on thresholds outside [-1, 1] or empty /
  // non-lowercase keywords.
  void validate() const;

  static FilterPolicy from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class FilterOutcome { Keep, PolicyExemptKeep, ClipBelow, DinoBelow, SsimBelow, ForbiddenKeyword };
std::string_view to_string(FilterOutcome o);
inline bool is_kept(FilterOutcome o) {
  return o == FilterOutcome::Keep || o == FilterOutcome::PolicyExemptKeep;
}

struct FilterDecision {
  std::string pair_id;
  FilterScores scores;
  FilterOutcome outcome = FilterOutcome::Keep;

  bool kept() const { return is_kept(outcome); }
  nlohmann::json to_json() const;
};

// First configured keyword found as a case-insensitive substring.
std::optional<std::string> find_forbidden_keyword(std::string_view raw_instruction,
                                                  const FilterPolicy& policy);

// Pure. Pairs from sources outside `applies_to` are kept unconditionally;
// otherwise the first failing rule in the order Clip, Dino, Ssim, Keyword is
// reported. The returned scores carry the keyword match, if any.
FilterDecision decide(const EditPair& pair, const FilterScores& scores, const FilterPolicy& policy);

// Pair plus the scores computed for it: the line format of the kept file.
struct ScoredPair {
  EditPair pair;
  FilterScores scores;

  bool operator==(const ScoredPair&) const = default;
};
nlohmann::json encode(const ScoredPair& v);
ScoredPair decode_scored_pair(const nlohmann::json& j);

struct ScoringModels {
  std::string clip_model{kClipLike};
  std::string dino_model{kDinoLike};
  SsimParams ssim;
};

// Loads both images and computes the three similarities. Throws
// std::runtime_error if an image cannot be loaded or decoded.
FilterScores score_pair(const EditPair& pair, const ImageSource& images,
                        EmbeddingProvider& embeddings, const FilterPolicy& policy,
                        const ScoringModels& models = {});

struct FilterRunResult {
  std::vector<FilterDecision> decisions;  // pair_id order
  std::vector<ScoredPair> kept;           // pair_id order
  std::vector<std::pair<std::string, std::string>> failures;  // pair_id, reason
};

FilterRunResult filter_pairs(std::vector<EditPair> pairs, const ImageSource& images,
                             EmbeddingProvider& embeddings, const FilterPolicy& policy,
                             std::size_t workers, const ScoringModels& models = {});

}  // namespace dim::simfilter
