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

#include "dim/designer/designer.hpp"

#include "dim/annotate/grammar.hpp"
#include "dim/gateway/structured.hpp"

namespace dim::designer {

gateway::ProviderRequest build_design_request(const ImageBlob& source_image, const std::string& raw_instruction,
                                              const annotate::PromptTemplateSet& templates,
                                              const DesignerOptions& options) {
  gateway::ProviderRequest req;
  req.provider_tag = options.designer_tag;
  req.model_tag = options.model_tag.empty() ? options.designer_tag : options.model_tag;
  req.purpose = std::string(gateway::purpose::kDesign);
  req.decoding.temperature = options.temperature;
  req.trace_id = source_image.ref + "/design";
  req.messages.push_back({"user",
                          annotate::fill(templates.cot_generation,
                                         {{"instruction", raw_instruction},
                                          {"images", annotate::describe_images(false)}}),
                          {gateway::ImageAttachment::from_blob(source_image)}});
  return req;
}

void check_design_request(const gateway::ProviderRequest& request) {
  if (request.image_count() != 1)
    throw ContractViolation("designer requests carry exactly the source image, got " +
                            std::to_string(request.image_count()) + " images");
}

BlueprintCoT design_blueprint(gateway::Gateway& gw, const ImageBlob& source_image,
                              const std::string& raw_instruction,
                              const annotate::PromptTemplateSet& templates, const DesignerOptions& options) {
  auto req = build_design_request(source_image, raw_instruction, templates, options);
  check_design_request(req);
  const std::string model = req.model_tag;
  auto out = gateway::ask_structured<BlueprintCoT>(
      gw, std::move(req), options.ns, options.reask_budget,
      [&](const std::string& text) -> Result<BlueprintCoT, std::string> {
        auto parsed = annotate::parse_cot_response(text, model, std::nullopt);
        if (parsed.ok()) return parsed.value();
        return err(parsed.error().message());
      });
  if (!out.value) throw DesignFailed("designer output failed validation: " + out.last_error, out.last_text);
  return std::move(*out.value);
}

std::string render_for_editor(const BlueprintCoT& blueprint) { return render_blueprint(blueprint); }

}  // namespace dim::designer
