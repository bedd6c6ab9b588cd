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

#include "dim/core/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "dim/core/digest.hpp"
#include "dim/core/text.hpp"

namespace dim {

namespace {

constexpr std::array<std::pair<SourceDataset::Kind, std::string_view>, 4> kSourceNames{{
    {SourceDataset::Kind::UltraEdit, "UltraEdit"},
    {SourceDataset::Kind::MagicBrush, "MagicBrush"},
    {SourceDataset::Kind::SeedEditPart3, "SeedEditPart3"},
    {SourceDataset::Kind::ShareGPT4oImage, "ShareGPT4oImage"},
}};

}  // namespace

SourceDataset SourceDataset::other(std::string name) {
  SourceDataset s = parse(name);
  return s;
}

SourceDataset SourceDataset::parse(std::string_view name) {
  for (const auto& [kind, n] : kSourceNames) {
    if (n == name) return SourceDataset(kind);
  }
  if (name.empty()) throw std::invalid_argument("source dataset name is empty");
  SourceDataset s(Kind::Other);
  s.other_ = std::string(name);
  return s;
}

std::string SourceDataset::name() const {
  for (const auto& [kind, n] : kSourceNames) {
    if (kind == kind_) return std::string(n);
  }
  return other_;
}

void check_filter_scores(const FilterScores& scores, std::string_view raw_instruction) {
  for (double v : {scores.clip_sim, scores.dino_sim, scores.ssim}) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      throw std::invalid_argument("filter score outside [-1, 1]");
  }
  if (scores.forbidden_keyword_hit) {
    const auto& kw = *scores.forbidden_keyword_hit;
    if (kw.empty() || kw != text::to_lower(kw) ||
        text::to_lower(raw_instruction).find(kw) == std::string::npos)
      throw std::invalid_argument("forbidden_keyword_hit not found in instruction");
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Misaligned: return "Misaligned";
    case Verdict::PartiallyAligned: return "PartiallyAligned";
    case Verdict::Aligned: return "Aligned";
  }
  return "?";
}

std::optional<Verdict> parse_verdict_name(std::string_view s) {
  for (Verdict v : {Verdict::Misaligned, Verdict::PartiallyAligned, Verdict::Aligned}) {
    if (text::iequals(s, to_string(v))) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Low: return "Low";
    case Tier::Medium: return "Medium";
    case Tier::High: return "High";
    case Tier::UltraHigh: return "UltraHigh";
  }
  return "?";
}

std::optional<Tier> parse_tier_name(std::string_view s) {
  for (Tier t : {Tier::Low, Tier::Medium, Tier::High, Tier::UltraHigh}) {
    if (text::iequals(s, to_string(t))) return t;
  }
  if (text::iequals(s, "Ultra-High") || text::iequals(s, "Ultra High")) return Tier::UltraHigh;
  return std::nullopt;
}

void check_judge_score(const JudgeScore& s) {
  if (!std::isfinite(s.score) || s.score < 0.0 || s.score > s.scale_max)
    throw std::invalid_argument("judge score outside [0, scale_max] for " + s.sample_id);
}

std::string stable_pair_id(std::string_view source_bytes, std::string_view target_bytes,
                           std::string_view raw_instruction) {
  if (source_bytes.empty() || target_bytes.empty() || raw_instruction.empty())
    throw std::invalid_argument("stable_pair_id: empty input");
  Sha256 h;
  h.update_framed(source_bytes).update_framed(target_bytes).update_framed(raw_instruction);
  return h.hex_digest();
}

}  // namespace dim
