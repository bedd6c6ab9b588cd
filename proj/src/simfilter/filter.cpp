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

#include "dim/simfilter/filter.hpp"

#include <algorithm>
#include <stdexcept>

#include "dim/core/parallel.hpp"
#include "dim/core/serialize.hpp"
#include "dim/core/text.hpp"

namespace dim::simfilter {

void FilterPolicy::validate() const {
  for (double t : {clip_min, dino_min, ssim_min}) {
    if (!(t >= -1.0 && t <= 1.0)) throw std::invalid_argument("filter threshold outside [-1, 1]");
  }
  for (const auto& kw : forbidden_keywords) {
    if (kw.empty()) throw std::invalid_argument("forbidden keyword is empty");
    if (kw != text::to_lower(kw)) throw std::invalid_argument("forbidden keyword must be lowercase: " + kw);
  }
}

FilterPolicy FilterPolicy::from_json(const nlohmann::json& j) {
  FilterPolicy p;
  if (!j.is_object()) throw std::invalid_argument("filter policy must be an object");
  p.clip_min = j.value("clip_min", p.clip_min);
  p.dino_min = j.value("dino_min", p.dino_min);
  p.ssim_min = j.value("ssim_min", p.ssim_min);
  if (j.contains("forbidden_keywords"))
    p.forbidden_keywords = j.at("forbidden_keywords").get<std::vector<std::string>>();
  if (j.contains("applies_to")) {
    p.applies_to.clear();
    for (const auto& name : j.at("applies_to").get<std::vector<std::string>>())
      p.applies_to.insert(SourceDataset::parse(name));
  }
  p.validate();
  return p;
}

nlohmann::json FilterPolicy::to_json() const {
  std::vector<std::string> sources;
  for (const auto& s : applies_to) sources.push_back(s.name());
  return {{"clip_min", clip_min},
          {"dino_min", dino_min},
          {"ssim_min", ssim_min},
          {"forbidden_keywords", forbidden_keywords},
          {"applies_to", sources}};
}

std::string_view to_string(FilterOutcome o) {
  switch (o) {
    case FilterOutcome::Keep: return "Keep";
    case FilterOutcome::PolicyExemptKeep: return "PolicyExempt-Keep";
    case FilterOutcome::ClipBelow: return "ClipBelow";
    case FilterOutcome::DinoBelow: return "DinoBelow";
    case FilterOutcome::SsimBelow: return "SsimBelow";
    case FilterOutcome::ForbiddenKeyword: return "ForbiddenKeyword";
  }
  return "?";
}

nlohmann::json FilterDecision::to_json() const {
  return with_schema_version({{"pair_id", pair_id},
                              {"scores", encode(scores)},
                              {"outcome", std::string(to_string(outcome))},
                              {"kept", kept()}});
}

std::optional<std::string> find_forbidden_keyword(std::string_view raw_instruction,
                                                  const FilterPolicy& policy) {
  const std::string lowered = text::to_lower(raw_instruction);
  for (const auto& kw : policy.forbidden_keywords) {
    if (lowered.find(kw) != std::string::npos) return kw;
  }
  return std::nullopt;
}

FilterDecision decide(const EditPair& pair, const FilterScores& scores, const FilterPolicy& policy) {
  FilterDecision d;
  d.pair_id = pair.pair_id;
  d.scores = scores;
  d.scores.forbidden_keyword_hit = find_forbidden_keyword(pair.raw_instruction, policy);

  if (!policy.applies_to.contains(pair.source_dataset)) {
    d.outcome = FilterOutcome::PolicyExemptKeep;
  } else if (!(scores.clip_sim > policy.clip_min)) {
    d.outcome = FilterOutcome::ClipBelow;
  } else if (!(scores.dino_sim > policy.dino_min)) {
    d.outcome = FilterOutcome::DinoBelow;
  } else if (!(scores.ssim > policy.ssim_min)) {
    d.outcome = FilterOutcome::SsimBelow;
  } else if (d.scores.forbidden_keyword_hit) {
    d.outcome = FilterOutcome::ForbiddenKeyword;
  } else {
    d.outcome = FilterOutcome::Keep;
  }
  return d;
}

nlohmann::json encode(const ScoredPair& v) {
  auto j = dim::encode(v.pair);
  j["filter_scores"] = dim::encode(v.scores);
  return with_schema_version(std::move(j));
}

ScoredPair decode_scored_pair(const nlohmann::json& j) {
  check_schema_version(j);
  ScoredPair sp;
  sp.pair = decode<EditPair>(j);
  if (!j.contains("filter_scores")) throw FormatError("missing field 'filter_scores'");
  sp.scores = decode<FilterScores>(j.at("filter_scores"));
  return sp;
}

FilterScores score_pair(const EditPair& pair, const ImageSource& images,
                        EmbeddingProvider& embeddings, const FilterPolicy& policy,
                        const ScoringModels& models) {
  auto src = images.load(pair.source_image.ref);
  auto tgt = images.load(pair.target_image.ref);
  if (!src || !tgt) throw std::runtime_error("unreadable image");
  FilterScores s;
  s.ssim = ssim_encoded(*src->bytes, *tgt->bytes, models.ssim);
  s.clip_sim = embed_similarity(embeddings, models.clip_model, *src, *tgt);
  s.dino_sim = embed_similarity(embeddings, models.dino_model, *src, *tgt);
  s.forbidden_keyword_hit = find_forbidden_keyword(pair.raw_instruction, policy);
  return s;
}

FilterRunResult filter_pairs(std::vector<EditPair> pairs, const ImageSource& images,
                             EmbeddingProvider& embeddings, const FilterPolicy& policy,
                             std::size_t workers, const ScoringModels& models) {
  policy.validate();
  std::sort(pairs.begin(), pairs.end(),
            [](const EditPair& a, const EditPair& b) { return a.pair_id < b.pair_id; });
  std::vector<std::optional<FilterDecision>> decisions(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    try {
      decisions[i] = decide(pairs[i], score_pair(pairs[i], images, embeddings, policy, models), policy);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  FilterRunResult out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!decisions[i]) {
      out.failures.emplace_back(pairs[i].pair_id, errors[i]);
      continue;
    }
    if (decisions[i]->kept()) out.kept.push_back({pairs[i], decisions[i]->scores});
    out.decisions.push_back(std::move(*decisions[i]));
  }
  return out;
}

}  // namespace dim::simfilter
