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

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dim::annotate {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dimension {
  std::string name;
  std::string prompt;
  bool operator==(const Dimension&) const = default;
};

// Prompt text for every provider call the pipeline makes. Placeholders are
// written {name}; see required_slots() for which each template must carry.
struct PromptTemplateSet {
  std::string verdict;
  std::string optimize_partially_aligned;
  std::string optimize_aligned;
  std::string cot_generation;
  std::string t2i_caption;
  std::string t2i_dimension;
  std::vector<Dimension> dimension_list;
  std::string audit_tier;
  std::string judge_imgedit9;
  std::string judge_gedit11;

  static PromptTemplateSet defaults();
  // Starts from the defaults and replaces each template whose file exists in
  // `dir`. Throws TemplateError on unreadable files or missing slots.
  static PromptTemplateSet load(const std::filesystem::path& dir);
  void write(const std::filesystem::path& dir) const;

  // Throws TemplateError naming the first template that lacks a slot.
  void validate() const;
  // Hash over the templates that shape dataset records (annotation and
  // captioning); audit and judge rubrics are excluded.
  std::string annotation_hash() const;
  // "<library version>+tpl.<first 12 hex of annotation_hash>"
  std::string pipeline_version() const;

  bool operator==(const PromptTemplateSet&) const = default;
};

// File name -> slots that template must contain.
const std::map<std::string, std::vector<std::string>>& required_slots();

// Replaces every {key} for the keys in `vars`; other braces are left alone.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Text for the {images} slot.
std::string describe_images(bool include_target);

}  // namespace dim::annotate
