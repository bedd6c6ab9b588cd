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

#include "dim/core/blueprint.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dim/core/text.hpp"

namespace dim {

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
    out += s[i];
  }
  return std::string(text::trim(out));
}

std::string_view strip_markup(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '_' ||
                        s.front() == '>' || s.front() == ' '))
    s.remove_prefix(1);
  return s;
}

std::string_view strip_separator(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == ':' ||
                        s.front() == '-' || s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  return s;
}

bool has_embedded_header(std::string_view body) {
  for (auto line : text::split_lines(body)) {
    if (match_step_header(line)) return true;
  }
  return false;
}

}  // namespace

std::string_view step_abbrev(Step s) {
  switch (s) {
    case Step::GlobalLayoutPerception: return "GLP";
    case Step::LocalObjectPerception: return "LOP";
    case Step::EditAreaLocalization: return "EAL";
    case Step::EditedImageImagination: return "EII";
  }
  return "?";
}

std::string_view step_header_name(Step s) {
  switch (s) {
    case Step::GlobalLayoutPerception: return "GLOBAL LAYOUT PERCEPTION";
    case Step::LocalObjectPerception: return "LOCAL OBJECT PERCEPTION";
    case Step::EditAreaLocalization: return "EDIT AREA LOCALIZATION";
    case Step::EditedImageImagination: return "EDITED IMAGE IMAGINATION";
  }
  return "?";
}

std::string_view step_field_name(Step s) {
  switch (s) {
    case Step::GlobalLayoutPerception: return "global_layout_perception";
    case Step::LocalObjectPerception: return "local_object_perception";
    case Step::EditAreaLocalization: return "edit_area_localization";
    case Step::EditedImageImagination: return "edited_image_imagination";
  }
  return "?";
}

std::optional<Step> step_from_field_name(std::string_view name) {
  for (Step s : kSteps) {
    if (step_field_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::MissingInstruction: return "missing_instruction";
    case ViolationKind::MissingStep: return "missing_step";
    case ViolationKind::EmptyStep: return "empty_step";
    case ViolationKind::OutOfOrderSteps: return "out_of_order_steps";
    case ViolationKind::DuplicateStep: return "duplicate_step";
    case ViolationKind::EmbeddedHeader: return "embedded_header";
  }
  return "?";
}

bool SchemaError::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

bool SchemaError::has(ViolationKind kind, std::string_view field) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
    return v.kind == kind && v.field == field;
  });
}

std::string SchemaError::message() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << to_string(violations[i].kind);
    if (!violations[i].field.empty()) os << ": " << violations[i].field;
  }
  return os.str();
}

Result<BlueprintCoT, SchemaError> validate_blueprint(const RawBlueprint& candidate) {
  SchemaError err;
  BlueprintCoT bp;

  if (!candidate.instruction || normalize(*candidate.instruction).empty()) {
    err.violations.push_back({ViolationKind::MissingInstruction, "optimized_instruction"});
  } else {
    bp.instruction_ = normalize(*candidate.instruction);
    if (has_embedded_header(bp.instruction_))
      err.violations.push_back({ViolationKind::EmbeddedHeader, "optimized_instruction"});
  }

  std::array<int, 4> seen{};
  for (const auto& section : candidate.sections) {
    const auto idx = static_cast<std::size_t>(step_index(section.step) - 1);
    if (++seen[idx] == 1) bp.steps_[idx] = normalize(section.text);
  }
  for (Step s : kSteps) {
    const auto idx = static_cast<std::size_t>(step_index(s) - 1);
    const std::string field(step_field_name(s));
    if (seen[idx] == 0) {
      err.violations.push_back({ViolationKind::MissingStep, field});
    } else {
      if (seen[idx] > 1) err.violations.push_back({ViolationKind::DuplicateStep, field});
      if (bp.steps_[idx].empty()) {
        err.violations.push_back({ViolationKind::EmptyStep, field});
      } else if (has_embedded_header(bp.steps_[idx])) {
        err.violations.push_back({ViolationKind::EmbeddedHeader, field});
      }
    }
  }

  int last = 0;
  for (const auto& section : candidate.sections) {
    const int idx = step_index(section.step);
    if (idx < last) {
      err.violations.push_back({ViolationKind::OutOfOrderSteps, std::string(step_field_name(section.step))});
      break;
    }
    last = idx;
  }

  if (!err.violations.empty()) return err;
  bp.generator_model_ = candidate.generator_model;
  return bp;
}

std::string render_blueprint(const BlueprintCoT& blueprint) {
  std::string out = "INSTRUCTION: ";
  out += blueprint.optimized_instruction();
  for (Step s : kSteps) {
    out += "\n\nSTEP ";
    out += static_cast<char>('0' + step_index(s));
    out += ": ";
    out += step_header_name(s);
    out += '\n';
    out += blueprint.step(s);
  }
  out += '\n';
  return out;
}

std::optional<Step> match_step_header(std::string_view line, std::string* inline_text) {
  std::string_view s = strip_markup(line);
  if (!text::starts_with_icase(s, "step")) return std::nullopt;
  s.remove_prefix(4);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  if (s.empty() || s.front() < '1' || s.front() > '4') return std::nullopt;
  s.remove_prefix(1);
  if (!s.empty() && s.front() >= '0' && s.front() <= '9') return std::nullopt;
  while (!s.empty() && (s.front() == ' ' || s.front() == '*' || s.front() == ')')) s.remove_prefix(1);
  if (s.empty() || (s.front() != ':' && s.front() != '.' && s.front() != '-')) return std::nullopt;
  s.remove_prefix(1);
  s = text::trim(s);
  while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
  for (Step step : kSteps) {
    const auto name = step_header_name(step);
    if (text::starts_with_icase(s, name)) {
      std::string_view rest = s.substr(name.size());
      if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest.front()))) return std::nullopt;
      if (inline_text) *inline_text = std::string(strip_separator(rest));
      return step;
    }
  }
  return std::nullopt;
}

RawBlueprint parse_blueprint_text(std::string_view body) {
  RawBlueprint raw;
  std::vector<std::string> current;
  bool in_instruction = false;
  std::vector<std::string> instruction_lines;
  std::optional<Step> open;

  auto flush = [&] {
    if (open) {
      raw.sections.push_back({*open, text::join(current, "\n")});
    }
    current.clear();
  };

  for (auto line : text::split_lines(body)) {
    std::string inline_text;
    if (auto step = match_step_header(line, &inline_text)) {
      if (in_instruction) {
        raw.instruction = std::string(text::trim(text::join(instruction_lines, "\n")));
        in_instruction = false;
      }
      flush();
      open = step;
      if (!inline_text.empty()) current.push_back(inline_text);
      continue;
    }
    if (open) {
      current.emplace_back(line);
      continue;
    }
    std::string_view s = strip_markup(line);
    if (!raw.instruction && !in_instruction && text::starts_with_icase(s, "instruction")) {
      std::string_view rest = s.substr(11);
      while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
      if (!rest.empty() && rest.front() == ':') {
        rest.remove_prefix(1);
        while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
        in_instruction = true;
        instruction_lines.emplace_back(text::trim(rest));
        continue;
      }
    }
    if (in_instruction) instruction_lines.emplace_back(line);
  }
  if (in_instruction) raw.instruction = std::string(text::trim(text::join(instruction_lines, "\n")));
  flush();
  return raw;
}

}  // namespace dim
