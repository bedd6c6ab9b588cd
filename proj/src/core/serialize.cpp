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

#include "dim/core/serialize.hpp"

#include <cctype>
#include <chrono>
#include <cmath>

namespace dim {

namespace {

template <typename T>
T field(const Json& j, const char* name) {
  if (!j.is_object()) throw FormatError("expected an object");
  auto it = j.find(name);
  if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw FormatError(std::string("wrong type for field '") + name + "'");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw FormatError(std::string("wrong type for field '") + name + "'");
  }
}

}  // namespace

bool is_rfc3339_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff]Z
  if (s.size() < 20 || s.back() != 'Z') return false;
  static constexpr std::string_view kPattern = "dddd-dd-ddTdd:dd:dd";
  for (std::size_t i = 0; i < kPattern.size(); ++i) {
    const char p = kPattern[i];
    if (p == 'd' ? !std::isdigit(static_cast<unsigned char>(s[i])) : s[i] != p) return false;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                        std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  if (!ymd.ok() || num(11, 2) > 23 || num(14, 2) > 59 || num(17, 2) > 60) return false;
  std::string_view rest = s.substr(kPattern.size(), s.size() - kPattern.size() - 1);
  if (rest.empty()) return true;
  if (rest.front() != '.' || rest.size() < 2) return false;
  for (char c : rest.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Json with_schema_version(Json j) {
  j["schema_version"] = std::string(kSchemaVersion);
  return j;
}

void check_schema_version(const Json& j) {
  const auto version = field<std::string>(j, "schema_version");
  const auto major = version.substr(0, version.find('.'));
  const auto ours = kSchemaVersion.substr(0, kSchemaVersion.find('.'));
  if (major != ours) throw FormatError("unsupported schema_version " + version);
}

Json encode(const ImageRef& v) {
  return Json{{"ref", v.ref}, {"width", v.width}, {"height", v.height}, {"digest", v.digest}};
}

template <>
ImageRef decode<ImageRef>(const Json& j) {
  ImageRef r;
  r.ref = field<std::string>(j, "ref");
  r.width = field<int>(j, "width");
  r.height = field<int>(j, "height");
  r.digest = field<std::string>(j, "digest");
  if (r.ref.empty() || r.width <= 0 || r.height <= 0) throw FormatError("invalid image reference");
  return r;
}

Json encode(const EditPair& v) {
  return Json{{"pair_id", v.pair_id},
              {"source_image", encode(v.source_image)},
              {"target_image", encode(v.target_image)},
              {"raw_instruction", v.raw_instruction},
              {"source_dataset", v.source_dataset.name()},
              {"metadata", v.metadata}};
}

template <>
EditPair decode<EditPair>(const Json& j) {
  EditPair p;
  p.pair_id = field<std::string>(j, "pair_id");
  p.source_image = decode<ImageRef>(field<Json>(j, "source_image"));
  p.target_image = decode<ImageRef>(field<Json>(j, "target_image"));
  p.raw_instruction = field<std::string>(j, "raw_instruction");
  p.source_dataset = SourceDataset::parse(field<std::string>(j, "source_dataset"));
  if (auto m = optional_field<std::map<std::string, std::string>>(j, "metadata")) p.metadata = *m;
  if (p.pair_id.empty()) throw FormatError("empty pair_id");
  return p;
}

Json encode(const FilterScores& v) {
  Json j{{"clip_sim", v.clip_sim}, {"dino_sim", v.dino_sim}, {"ssim", v.ssim}};
  j["forbidden_keyword_hit"] = v.forbidden_keyword_hit ? Json(*v.forbidden_keyword_hit) : Json(nullptr);
  return j;
}

template <>
FilterScores decode<FilterScores>(const Json& j) {
  FilterScores s;
  s.clip_sim = field<double>(j, "clip_sim");
  s.dino_sim = field<double>(j, "dino_sim");
  s.ssim = field<double>(j, "ssim");
  s.forbidden_keyword_hit = optional_field<std::string>(j, "forbidden_keyword_hit");
  for (double v : {s.clip_sim, s.dino_sim, s.ssim}) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) throw FormatError("filter score outside [-1, 1]");
  }
  return s;
}

Json encode(const AlignmentVerdict& v) {
  return Json{{"verdict", std::string(to_string(v.verdict))},
              {"rationale", v.rationale},
              {"judge_model", v.judge_model},
              {"raw_response", v.raw_response}};
}

template <>
AlignmentVerdict decode<AlignmentVerdict>(const Json& j) {
  AlignmentVerdict v;
  const auto name = field<std::string>(j, "verdict");
  auto parsed = parse_verdict_name(name);
  if (!parsed || name != to_string(*parsed)) throw FormatError("unknown verdict '" + name + "'");
  v.verdict = *parsed;
  v.rationale = field<std::string>(j, "rationale");
  v.judge_model = field<std::string>(j, "judge_model");
  v.raw_response = field<std::string>(j, "raw_response");
  return v;
}

Json encode(const BlueprintCoT& v) {
  Json steps = Json::array();
  for (Step s : kSteps) {
    steps.push_back(Json{{"step_index", step_index(s)},
                         {"step_name", std::string(step_field_name(s))},
                         {"text", v.step(s)}});
  }
  return Json{{"optimized_instruction", v.optimized_instruction()},
              {"generator_model", v.generator_model()},
              {"steps", steps}};
}

template <>
BlueprintCoT decode<BlueprintCoT>(const Json& j) {
  RawBlueprint raw;
  raw.instruction = field<std::string>(j, "optimized_instruction");
  raw.generator_model = field<std::string>(j, "generator_model");
  const auto steps = field<Json>(j, "steps");
  if (!steps.is_array()) throw FormatError("blueprint steps must be an array");
  int position = 0;
  for (const auto& item : steps) {
    ++position;
    const int index = field<int>(item, "step_index");
    const auto name = field<std::string>(item, "step_name");
    auto step = step_from_field_name(name);
    if (!step) throw FormatError("unknown step_name '" + name + "'");
    if (step_index(*step) != index || index != position)
      throw FormatError("blueprint step '" + name + "' out of position");
    raw.sections.push_back({*step, field<std::string>(item, "text")});
  }
  auto bp = validate_blueprint(raw);
  if (!bp) throw FormatError("invalid blueprint: " + bp.error().message());
  if (bp->optimized_instruction() != *raw.instruction)
    throw FormatError("blueprint instruction is not normalized");
  for (std::size_t i = 0; i < raw.sections.size(); ++i) {
    if (bp->steps()[i] != raw.sections[i].text) throw FormatError("blueprint step is not normalized");
  }
  return std::move(bp).value();
}

Json encode(const DatasetRecord& v) {
  return Json{{"pair_id", v.pair_id()},
              {"source_dataset", v.source_dataset().name()},
              {"raw_instruction", v.raw_instruction()},
              {"source_image", encode(v.source_image())},
              {"target_image", encode(v.target_image())},
              {"filter_scores", encode(v.filter_scores())},
              {"verdict", encode(v.verdict())},
              {"blueprint", encode(v.blueprint())},
              {"pipeline_version", v.pipeline_version()},
              {"created_at", v.created_at()}};
}

template <>
DatasetRecord decode<DatasetRecord>(const Json& j) {
  EditPair pair;
  pair.pair_id = field<std::string>(j, "pair_id");
  pair.source_dataset = SourceDataset::parse(field<std::string>(j, "source_dataset"));
  pair.raw_instruction = field<std::string>(j, "raw_instruction");
  pair.source_image = decode<ImageRef>(field<Json>(j, "source_image"));
  pair.target_image = decode<ImageRef>(field<Json>(j, "target_image"));
  auto created_at = field<std::string>(j, "created_at");
  if (!is_rfc3339_utc(created_at)) throw FormatError("created_at is not RFC 3339 UTC");
  auto rec = DatasetRecord::create(pair, decode<FilterScores>(field<Json>(j, "filter_scores")),
                                   decode<AlignmentVerdict>(field<Json>(j, "verdict")),
                                   decode<BlueprintCoT>(field<Json>(j, "blueprint")),
                                   field<std::string>(j, "pipeline_version"), std::move(created_at));
  if (!rec) throw FormatError(rec.error());
  return std::move(rec).value();
}

Json encode(const TierLabel& v) {
  return Json{{"tier", std::string(to_string(v.tier))},
              {"judge_model", v.judge_model},
              {"rationale", v.rationale}};
}

template <>
TierLabel decode<TierLabel>(const Json& j) {
  TierLabel t;
  const auto name = field<std::string>(j, "tier");
  auto tier = parse_tier_name(name);
  if (!tier || name != to_string(*tier)) throw FormatError("unknown tier '" + name + "'");
  t.tier = *tier;
  t.judge_model = field<std::string>(j, "judge_model");
  t.rationale = field<std::string>(j, "rationale");
  return t;
}

Json encode(const JudgeScore& v) {
  Json j{{"sample_id", v.sample_id},
         {"task", v.task},
         {"score", v.score},
         {"scale_max", v.scale_max},
         {"judge_model", v.judge_model}};
  if (v.semantic_consistency) j["semantic_consistency"] = *v.semantic_consistency;
  if (v.perceptual_quality) j["perceptual_quality"] = *v.perceptual_quality;
  return j;
}

template <>
JudgeScore decode<JudgeScore>(const Json& j) {
  JudgeScore s;
  s.sample_id = field<std::string>(j, "sample_id");
  s.task = field<std::string>(j, "task");
  s.score = field<double>(j, "score");
  s.scale_max = field<double>(j, "scale_max");
  s.judge_model = field<std::string>(j, "judge_model");
  s.semantic_consistency = optional_field<double>(j, "semantic_consistency");
  s.perceptual_quality = optional_field<double>(j, "perceptual_quality");
  try {
    check_judge_score(s);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return s;
}

}  // namespace dim
