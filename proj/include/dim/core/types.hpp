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

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace dim {

class SourceDataset {
 public:
  enum class Kind { UltraEdit, MagicBrush, SeedEditPart3, ShareGPT4oImage, Other };

  SourceDataset() = default;
  SourceDataset(Kind kind) : kind_(kind) {}  // NOLINT(google-explicit-constructor)
  static SourceDataset other(std::string name);
  // Known names map to their kind; anything else becomes Other(name).
  static SourceDataset parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string name() const;

  bool operator==(const SourceDataset&) const = default;
  auto operator<=>(const SourceDataset& o) const { return name() <=> o.name(); }

 private:
  Kind kind_ = Kind::Other;
  std::string other_;
};

// Reference to an image held outside the record, plus what decoding told us.
struct ImageRef {
  std::string ref;
  int width = 0;
  int height = 0;
  std::string digest;  // sha256 of the encoded bytes

  bool operator==(const ImageRef&) const = default;
};

struct EditPair {
  std::string pair_id;
  ImageRef source_image;
  ImageRef target_image;
  std::string raw_instruction;
  SourceDataset source_dataset;
  std::map<std::string, std::string> metadata;

  bool operator==(const EditPair&) const = default;
};

struct FilterScores {
  double clip_sim = 0.0;
  double dino_sim = 0.0;
  double ssim = 0.0;
  std::optional<std::string> forbidden_keyword_hit;

  bool operator==(const FilterScores&) const = default;
};

// Throws std::invalid_argument when a score is non-finite or outside [-1, 1],
// or when the keyword hit is not a substring of the lowercased instruction.
void check_filter_scores(const FilterScores& scores, std::string_view raw_instruction);

enum class Verdict { Misaligned, PartiallyAligned, Aligned };
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict_name(std::string_view s);

struct AlignmentVerdict {
  Verdict verdict = Verdict::Misaligned;
  std::string rationale;
  std::string judge_model;
  std::string raw_response;

  bool operator==(const AlignmentVerdict&) const = default;
};

enum class Tier { Low, Medium, High, UltraHigh };
inline constexpr int kTierCount = 4;
std::string_view to_string(Tier t);
// Accepts "UltraHigh", "Ultra-High" and "Ultra High", case-insensitively.
std::optional<Tier> parse_tier_name(std::string_view s);

struct TierLabel {
  Tier tier = Tier::Low;
  std::string judge_model;
  std::string rationale;

  bool operator==(const TierLabel&) const = default;
};

struct JudgeScore {
  std::string sample_id;
  std::string task;
  double score = 0.0;
  double scale_max = 5.0;
  std::string judge_model;
  std::optional<double> semantic_consistency;
  std::optional<double> perceptual_quality;

  bool operator==(const JudgeScore&) const = default;
};

// Throws std::invalid_argument unless 0 <= score <= scale_max.
void check_judge_score(const JudgeScore& s);

// Hex SHA-256 over the length-prefixed concatenation of the three inputs.
// Throws std::invalid_argument if any input is empty.
std::string stable_pair_id(std::string_view source_bytes, std::string_view target_bytes,
                           std::string_view raw_instruction);

}  // namespace dim
