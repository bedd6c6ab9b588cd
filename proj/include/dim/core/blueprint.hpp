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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dim/core/result.hpp"

namespace dim {

// The four imagination steps, in their fixed order.
enum class Step {
  GlobalLayoutPerception = 1,
  LocalObjectPerception = 2,
  EditAreaLocalization = 3,
  EditedImageImagination = 4,
};
inline constexpr std::array<Step, 4> kSteps{
    Step::GlobalLayoutPerception, Step::LocalObjectPerception,
    Step::EditAreaLocalization, Step::EditedImageImagination};

inline int step_index(Step s) { return static_cast<int>(s); }
std::string_view step_abbrev(Step s);       // "GLP"
std::string_view step_header_name(Step s);  // "GLOBAL LAYOUT PERCEPTION"
std::string_view step_field_name(Step s);   // "global_layout_perception"
std::optional<Step> step_from_field_name(std::string_view name);

// Sections as they were found in a provider response, before any checks.
struct RawBlueprint {
  struct Section {
    Step step;
    std::string text;
  };
  std::optional<std::string> instruction;
  std::vector<Section> sections;  // encounter order
  std::string generator_model;
};

enum class ViolationKind {
  MissingInstruction,
  MissingStep,
  EmptyStep,
  OutOfOrderSteps,
  DuplicateStep,
  EmbeddedHeader,
};
std::string_view to_string(ViolationKind k);

struct SchemaError {
  struct Violation {
    ViolationKind kind;
    std::string field;
  };
  std::vector<Violation> violations;

  bool has(ViolationKind kind) const;
  bool has(ViolationKind kind, std::string_view field) const;
  std::string message() const;
};

class BlueprintCoT {
 public:
  const std::string& optimized_instruction() const { return instruction_; }
  const std::string& step(Step s) const { return steps_[static_cast<std::size_t>(step_index(s) - 1)]; }
  const std::array<std::string, 4>& steps() const { return steps_; }
  const std::string& generator_model() const { return generator_model_; }

  bool operator==(const BlueprintCoT&) const = default;

 private:
  friend Result<BlueprintCoT, SchemaError> validate_blueprint(const RawBlueprint& candidate);
  BlueprintCoT() = default;

  std::string instruction_;
  std::array<std::string, 4> steps_;
  std::string generator_model_;
};

// Checks every invariant and reports all violations at once. Text fields are
// trimmed and CRLF-normalized on the way in.
Result<BlueprintCoT, SchemaError> validate_blueprint(const RawBlueprint& candidate);

// Canonical text form: an INSTRUCTION line followed by the four STEP sections
// with fixed headers, separated by blank lines. Byte-stable across platforms.
std::string render_blueprint(const BlueprintCoT& blueprint);

// Recognizes `STEP <n>: <NAME>` header lines (case-insensitive, tolerant of
// markdown emphasis and inline text after the name) and `INSTRUCTION:` lines.
RawBlueprint parse_blueprint_text(std::string_view text);

// Which step a line opens, if it is a step header. `inline_text` receives any
// text following the header on the same line.
std::optional<Step> match_step_header(std::string_view line, std::string* inline_text = nullptr);

}  // namespace dim
