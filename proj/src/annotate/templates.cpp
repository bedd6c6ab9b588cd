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

#include "dim/annotate/templates.hpp"

#include <fstream>

#include <json.hpp>

#include "dim/core/digest.hpp"
#include "dim/core/jsonl.hpp"
#include "dim/version.hpp"

namespace dim::annotate {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVerdict = R"(You are checking whether an image-editing instruction matches the edit that was actually made.
{images}
Instruction: {raw_instruction}

Compare the two images and decide:
- Misaligned: the instruction does not describe the change at all.
- PartiallyAligned: the requested change is present, but other objects were also added or removed without being requested.
- Aligned: the instruction fully describes the change.

Reply with a first line of the form
VERDICT: <Misaligned|PartiallyAligned|Aligned>
followed by a short explanation.
)";

constexpr const char* kOptimizePartial = R"(An image-editing instruction describes only part of the edit that was made.
{images}
Instruction: {raw_instruction}
Reviewer notes: {rationale}

Rewrite the instruction so that it also states every unrequested change visible in the edited image, including objects that were added or removed. Keep the original request. Reply with the rewritten instruction only.
)";

constexpr const char* kOptimizeAligned = R"(An image-editing instruction matches the edit but may be vague.
{images}
Instruction: {raw_instruction}

Rewrite the instruction so that it is unambiguous: name the exact object or region that changes and what it changes into. Do not add changes that are not visible. Reply with the rewritten instruction only.
)";

constexpr const char* kCot = R"(Plan an image edit the way a careful human editor would, before touching any pixels.
{images}
Instruction: {instruction}

Write the plan in exactly this format:

INSTRUCTION: <the instruction, restated precisely>

STEP 1: GLOBAL LAYOUT PERCEPTION
<the main objects in the source image and where they are>

STEP 2: LOCAL OBJECT PERCEPTION
<appearance of each relevant object: shape, color, texture, state>

STEP 3: EDIT AREA LOCALIZATION
<which objects or regions the edit touches>

STEP 4: EDITED IMAGE IMAGINATION
<what the image looks like after the edit>

Use each header once, in this order, and do not repeat headers inside a step.
)";

constexpr const char* kCaption = R"(Describe the attached image in detail along each of the following dimensions.

{dimensions}

For every dimension k write a section that starts with a line
DIMENSION k:
followed by the description for that dimension. Cover all dimensions in order.
)";

constexpr const char* kDimension = R"(Describe the attached image with respect to one aspect.
Aspect: {dimension_name}
{dimension_prompt}
Reply with the description only.
)";

constexpr const char* kAudit = R"(Grade the quality of an editing plan written for an image edit.
{images}
Instruction: {instruction}

Plan:
{blueprint}

Tiers:
- Low: the plan contradicts the images or the instruction.
- Medium: the plan is usable but misses or misplaces important details.
- High: the plan is accurate with minor omissions.
- UltraHigh: the plan is accurate, complete and precise.

Reply with a first line of the form
TIER: <Low|Medium|High|UltraHigh>
followed by a short justification.
)";

constexpr const char* kJudgeImgEdit = R"(You are grading the result of an image edit.
Task category: {task}
Instruction: {instruction}
{images}

Rate how well the edited image follows the instruction while keeping the rest of the image intact, on a scale from 1 to 5.
Reply with a line of the form
SCORE: <number>
)";

constexpr const char* kJudgeGEdit = R"(You are grading the result of an image edit.
Task: {task}
Instruction: {instruction}
{images}

Give a semantic consistency score and a perceptual quality score, each from 0 to 10, and an overall score from 0 to 10.
Reply with lines of the form
SC: <number>
PQ: <number>
SCORE: <number>
)";

const std::vector<Dimension>& default_dimensions() {
  static const std::vector<Dimension> dims{
      {"Main Subject", "What is the primary subject and what is it doing?"},
      {"Object Attributes", "Describe the color, shape, size and material of the visible objects."},
      {"Object Count", "How many instances of each kind of object are visible?"},
      {"Spatial Relations", "Where are the objects relative to each other?"},
      {"Background", "Describe the background and setting."},
      {"Environment", "Indoor or outdoor, and what kind of place?"},
      {"Lighting", "Describe the light sources, direction and intensity."},
      {"Shadows and Reflections", "Describe any shadows, reflections or highlights."},
      {"Color Palette", "Which colors dominate and how do they relate?"},
      {"Texture and Material", "Describe surface textures and materials."},
      {"Composition", "How is the frame organized? Mention balance, symmetry and focal points."},
      {"Camera Viewpoint", "Describe the camera angle, distance and framing."},
      {"Depth of Field", "Which parts are sharp and which are blurred?"},
      {"Artistic Style", "Photograph, painting, render or another style? Name it."},
      {"Mood and Atmosphere", "What mood does the image convey?"},
      {"Actions and Poses", "Describe the poses, gestures and motion of people or animals."},
      {"Text and Symbols", "Transcribe any visible text, logos or signs."},
      {"People", "Describe apparent age, clothing and expression of any people."},
      {"Time and Season", "What time of day and season does the image suggest?"},
      {"World Knowledge", "Name any recognizable landmarks, brands, species or cultural references."},
      {"Image Quality", "Comment on sharpness, noise, exposure and artifacts."},
  };
  return dims;
}

struct Field {
  const char* file;
  std::string PromptTemplateSet::*member;
  bool annotation;
};

constexpr Field kFields[] = {
    {"verdict.txt", &PromptTemplateSet::verdict, true},
    {"optimize_partially_aligned.txt", &PromptTemplateSet::optimize_partially_aligned, true},
    {"optimize_aligned.txt", &PromptTemplateSet::optimize_aligned, true},
    {"cot_generation.txt", &PromptTemplateSet::cot_generation, true},
    {"t2i_caption.txt", &PromptTemplateSet::t2i_caption, true},
    {"t2i_dimension.txt", &PromptTemplateSet::t2i_dimension, true},
    {"audit_tier.txt", &PromptTemplateSet::audit_tier, false},
    {"judge_imgedit9.txt", &PromptTemplateSet::judge_imgedit9, false},
    {"judge_gedit11.txt", &PromptTemplateSet::judge_gedit11, false},
};

constexpr const char* kDimensionsFile = "dimensions.json";

}  // namespace

const std::map<std::string, std::vector<std::string>>& required_slots() {
  static const std::map<std::string, std::vector<std::string>> slots{
      {"verdict.txt", {"raw_instruction", "images"}},
      {"optimize_partially_aligned.txt", {"raw_instruction", "rationale", "images"}},
      {"optimize_aligned.txt", {"raw_instruction", "images"}},
      {"cot_generation.txt", {"instruction", "images"}},
      {"t2i_caption.txt", {"dimensions"}},
      {"t2i_dimension.txt", {"dimension_name", "dimension_prompt"}},
      {"audit_tier.txt", {"instruction", "blueprint", "images"}},
      {"judge_imgedit9.txt", {"task", "instruction", "images"}},
      {"judge_gedit11.txt", {"task", "instruction", "images"}},
  };
  return slots;
}

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string describe_images(bool include_target) {
  return include_target
             ? "Two images are attached: the first is the source image, the second is the edited "
               "image, given for reference."
             : "One image is attached: the source image.";
}

PromptTemplateSet PromptTemplateSet::defaults() {
  PromptTemplateSet t;
  t.verdict = kVerdict;
  t.optimize_partially_aligned = kOptimizePartial;
  t.optimize_aligned = kOptimizeAligned;
  t.cot_generation = kCot;
  t.t2i_caption = kCaption;
  t.t2i_dimension = kDimension;
  t.dimension_list = default_dimensions();
  t.audit_tier = kAudit;
  t.judge_imgedit9 = kJudgeImgEdit;
  t.judge_gedit11 = kJudgeGEdit;
  return t;
}

PromptTemplateSet PromptTemplateSet::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw TemplateError("template directory not found: " + dir.string());
  PromptTemplateSet t = defaults();
  try {
    for (const auto& f : kFields) {
      if (fs::exists(dir / f.file)) t.*f.member = read_file(dir / f.file);
    }
    if (fs::exists(dir / kDimensionsFile)) {
      const auto j = nlohmann::json::parse(read_file(dir / kDimensionsFile));
      if (!j.is_array()) throw TemplateError(std::string(kDimensionsFile) + " must be an array");
      t.dimension_list.clear();
      for (const auto& d : j) {
        t.dimension_list.push_back({d.at("name").get<std::string>(), d.at("prompt").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string(kDimensionsFile) + ": " + e.what());
  } catch (const TemplateError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw TemplateError(e.what());
  }
  t.validate();
  return t;
}

void PromptTemplateSet::write(const fs::path& dir) const {
  fs::create_directories(dir);
  for (const auto& f : kFields) atomic_write_file(dir / f.file, this->*f.member);
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : dimension_list) dims.push_back({{"name", d.name}, {"prompt", d.prompt}});
  atomic_write_file(dir / kDimensionsFile, dims.dump(2) + "\n");
}

void PromptTemplateSet::validate() const {
  for (const auto& f : kFields) {
    const std::string& body = this->*f.member;
    for (const auto& slot : required_slots().at(f.file)) {
      if (body.find("{" + slot + "}") == std::string::npos)
        throw TemplateError(std::string(f.file) + " lacks the {" + slot + "} slot");
    }
  }
  if (dimension_list.empty()) throw TemplateError("dimension list is empty");
  for (const auto& d : dimension_list) {
    if (d.name.empty()) throw TemplateError("dimension with an empty name");
  }
}

std::string PromptTemplateSet::annotation_hash() const {
  Sha256 h;
  for (const auto& f : kFields) {
    if (!f.annotation) continue;
    h.update_framed(f.file).update_framed(this->*f.member);
  }
  h.update_framed(kDimensionsFile);
  for (const auto& d : dimension_list) h.update_framed(d.name).update_framed(d.prompt);
  return h.hex_digest();
}

std::string PromptTemplateSet::pipeline_version() const {
  return std::string(kPipelineVersion) + "+tpl." + annotation_hash().substr(0, 12);
}

}  // namespace dim::annotate
