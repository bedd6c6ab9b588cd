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

#include "dim/annotate/grammar.hpp"

#include <vector>

#include "dim/core/text.hpp"

namespace dim::annotate {

Result<AlignmentVerdict, std::string> parse_verdict_response(std::string_view response,
                                                             const std::string& judge_model) {
  std::optional<Verdict> found;
  for (const auto& value : text::labeled_values(response, "VERDICT")) {
    auto v = parse_verdict_name(value);
    if (!v) return std::string("unknown verdict '" + value + "'");
    if (found && *found != *v) return std::string("conflicting VERDICT lines");
    found = v;
  }
  if (!found) return std::string("no 'VERDICT: <Misaligned|PartiallyAligned|Aligned>' line");

  std::vector<std::string> rest;
  for (auto line : text::split_lines(response)) {
    auto t = text::trim(line);
    if (!text::labeled_values(t, "VERDICT").empty()) continue;
    if (!t.empty()) rest.emplace_back(t);
  }
  AlignmentVerdict v;
  v.verdict = *found;
  v.rationale = text::join(rest, "\n");
  v.judge_model = judge_model;
  v.raw_response = std::string(response);
  return v;
}

Result<std::string, std::string> parse_optimized_response(std::string_view response) {
  std::string_view s = text::trim(response);
  for (std::string_view label : {"optimized instruction:", "rewritten instruction:",
                                 "refined instruction:", "instruction:"}) {
    if (text::starts_with_icase(s, label)) {
      s = text::trim(s.substr(label.size()));
      break;
    }
  }
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  if (s.empty()) return err(std::string("empty instruction"));
  return std::string(s);
}

Result<BlueprintCoT, SchemaError> parse_cot_response(std::string_view response,
                                                     const std::string& generator_model,
                                                     const std::optional<std::string>& instruction) {
  RawBlueprint raw = parse_blueprint_text(response);
  raw.generator_model = generator_model;
  if (instruction) raw.instruction = *instruction;
  return validate_blueprint(raw);
}

}  // namespace dim::annotate
