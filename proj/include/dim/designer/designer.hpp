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

#include <stdexcept>
#include <string>

#include "dim/annotate/templates.hpp"
#include "dim/core/blueprint.hpp"
#include "dim/core/image.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::designer {

// A request that would carry anything but exactly the source image.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DesignFailed : public std::runtime_error {
 public:
  DesignFailed(const std::string& what, std::string last_response)
      : std::runtime_error(what), last_response_(std::move(last_response)) {}
  const std::string& last_response() const { return last_response_; }

 private:
  std::string last_response_;
};

struct DesignerOptions {
  std::string designer_tag;
  std::string model_tag;  // empty: designer_tag
  std::string ns = "design";
  int reask_budget = 2;
  double temperature = 0.0;
};

// Builds the designer request: the CoT template with the single-image slot
// text, and the source image as the only attachment.
gateway::ProviderRequest build_design_request(const ImageBlob& source_image, const std::string& raw_instruction,
                                              const annotate::PromptTemplateSet& templates,
                                              const DesignerOptions& options);

// Throws ContractViolation if a request carries other than one image.
void check_design_request(const gateway::ProviderRequest& request);

// Produces a blueprint from the source image and instruction alone. The
// INSTRUCTION line of the answer becomes optimized_instruction. Throws
// DesignFailed after the re-ask budget; gateway errors propagate.
BlueprintCoT design_blueprint(gateway::Gateway& gw, const ImageBlob& source_image,
                              const std::string& raw_instruction,
                              const annotate::PromptTemplateSet& templates, const DesignerOptions& options);

// Conditioning text for an editor: identical to the dataset rendering.
std::string render_for_editor(const BlueprintCoT& blueprint);

}  // namespace dim::designer
