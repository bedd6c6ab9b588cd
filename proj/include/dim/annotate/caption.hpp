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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dim/annotate/templates.hpp"
#include "dim/core/image.hpp"
#include "dim/core/result.hpp"
#include "dim/core/serialize.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::annotate {

enum class CaptionMode { Structured, PerDimension };
std::string_view to_string(CaptionMode m);
CaptionMode parse_caption_mode(std::string_view s);  // throws std::invalid_argument

struct DimensionCaption {
  std::string name;
  std::string text;
  bool operator==(const DimensionCaption&) const = default;
};

struct LongCaption {
  ImageRef image;
  std::string caption;  // dimension texts joined by blank lines
  std::vector<DimensionCaption> dimensions;
  std::size_t word_count = 0;
  std::string generator_model;
  CaptionMode mode = CaptionMode::Structured;
  std::string pipeline_version;

  bool operator==(const LongCaption&) const = default;
  Json to_json() const;
  static LongCaption from_json(const Json& j);
};

struct CaptionFailure {
  std::string dimension;  // empty when the failure is not tied to one dimension
  std::string detail;
};

struct CaptionOptions {
  std::string provider_tag;
  std::string model_tag;
  std::string ns = "caption";
  CaptionMode mode = CaptionMode::Structured;
  int reask_budget = 2;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parses `DIMENSION k:` sections; every k in 1..n must appear exactly once
// with a non-empty body.
Result<std::vector<std::string>, CaptionFailure> parse_structured_caption(std::string_view response,
                                                                          std::size_t n);

// Throws PreconditionError, before any provider call, when the image does not
// pass the resolution gate.
Result<LongCaption, CaptionFailure> caption_t2i(gateway::Gateway& gw, const PromptTemplateSet& templates,
                                                const ImageBlob& image, const CaptionOptions& options);

}  // namespace dim::annotate
