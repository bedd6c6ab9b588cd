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

#include "dim/annotate/caption.hpp"

#include <cctype>
#include <optional>

#include "dim/core/text.hpp"
#include "dim/gateway/structured.hpp"
#include "dim/ingest/ingest.hpp"

namespace dim::annotate {

std::string_view to_string(CaptionMode m) {
  return m == CaptionMode::Structured ? "structured" : "per_dimension";
}

CaptionMode parse_caption_mode(std::string_view s) {
  if (s == "structured") return CaptionMode::Structured;
  if (s == "per_dimension" || s == "per-dimension") return CaptionMode::PerDimension;
  throw std::invalid_argument("unknown caption mode '" + std::string(s) + "'");
}

Json LongCaption::to_json() const {
  Json dims = Json::array();
  for (const auto& d : dimensions) dims.push_back({{"name", d.name}, {"text", d.text}});
  return {{"image", encode(image)},
          {"caption", caption},
          {"dimensions", dims},
          {"word_count", word_count},
          {"generator_model", generator_model},
          {"mode", to_string(mode)},
          {"pipeline_version", pipeline_version}};
}

LongCaption LongCaption::from_json(const Json& j) {
  try {
    LongCaption c;
    c.image = decode<ImageRef>(j.at("image"));
    c.caption = j.at("caption").get<std::string>();
    for (const auto& d : j.at("dimensions"))
      c.dimensions.push_back({d.at("name").get<std::string>(), d.at("text").get<std::string>()});
    c.word_count = j.at("word_count").get<std::size_t>();
    c.generator_model = j.at("generator_model").get<std::string>();
    c.mode = parse_caption_mode(j.at("mode").get<std::string>());
    c.pipeline_version = j.at("pipeline_version").get<std::string>();
    return c;
  } catch (const std::exception& e) {
    throw FormatError(std::string("caption: ") + e.what());
  }
}

namespace {

// "DIMENSION 12: ..." -> 12, with any text after the colon in `rest`.
std::optional<std::size_t> match_dimension_header(std::string_view line, std::string* rest) {
  std::string_view s = text::trim(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == ' ')) s.remove_prefix(1);
  if (!text::starts_with_icase(s, "dimension")) return std::nullopt;
  s = text::trim(s.substr(9));
  std::size_t k = 0, digits = 0;
  while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
    k = k * 10 + static_cast<std::size_t>(s.front() - '0');
    s.remove_prefix(1);
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  while (!s.empty() && (s.front() == '*' || s.front() == ' ')) s.remove_prefix(1);
  if (s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  while (!s.empty() && (s.front() == '*' || s.front() == ' ')) s.remove_prefix(1);
  if (rest) *rest = std::string(text::trim(s));
  return k;
}

}  // namespace

Result<std::vector<std::string>, CaptionFailure> parse_structured_caption(std::string_view response,
                                                                          std::size_t n) {
  std::vector<std::optional<std::vector<std::string>>> bodies(n);
  std::optional<std::size_t> open;
  for (auto line : text::split_lines(response)) {
    std::string rest;
    if (auto k = match_dimension_header(line, &rest)) {
      if (*k < 1 || *k > n) return CaptionFailure{"", "unexpected DIMENSION " + std::to_string(*k)};
      if (bodies[*k - 1]) return CaptionFailure{std::to_string(*k), "repeated"};
      bodies[*k - 1].emplace();
      if (!rest.empty()) bodies[*k - 1]->push_back(rest);
      open = *k - 1;
      continue;
    }
    if (open) bodies[*open]->emplace_back(line);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!bodies[i]) return CaptionFailure{std::to_string(i + 1), "missing"};
    std::string body(text::trim(text::join(*bodies[i], "\n")));
    if (body.empty()) return CaptionFailure{std::to_string(i + 1), "empty"};
    out.push_back(std::move(body));
  }
  return out;
}

Result<LongCaption, CaptionFailure> caption_t2i(gateway::Gateway& gw, const PromptTemplateSet& templates,
                                                const ImageBlob& image, const CaptionOptions& options) {
  if (ingest::resolution_gate(image) != ingest::GateResult::Pass)
    throw PreconditionError(image.ref + " does not pass the resolution gate (" +
                            std::to_string(image.width) + "x" + std::to_string(image.height) + ")");
  const auto& dims = templates.dimension_list;
  const std::string model = options.model_tag.empty() ? options.provider_tag : options.model_tag;
  auto base_request = [&](std::string_view purpose, std::string prompt) {
    gateway::ProviderRequest req;
    req.provider_tag = options.provider_tag;
    req.model_tag = model;
    req.purpose = std::string(purpose);
    req.messages.push_back({"user", std::move(prompt), {gateway::ImageAttachment::from_blob(image)}});
    req.trace_id = image.ref;
    return req;
  };

  LongCaption c;
  c.image = image.as_ref();
  c.generator_model = model;
  c.mode = options.mode;
  c.pipeline_version = templates.pipeline_version();

  if (options.mode == CaptionMode::Structured) {
    std::string listing;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      listing += "[" + std::to_string(i + 1) + "] " + dims[i].name + ": " + dims[i].prompt + "\n";
    }
    auto req = base_request(gateway::purpose::kCaption, fill(templates.t2i_caption, {{"dimensions", listing}}));
    CaptionFailure last{"", "no answer"};
    auto out = gateway::ask_structured<std::vector<std::string>>(
        gw, std::move(req), options.ns, options.reask_budget,
        [&](const std::string& text) -> Result<std::vector<std::string>, std::string> {
          auto parsed = parse_structured_caption(text, dims.size());
          if (parsed.ok()) return parsed.value();
          last = parsed.error();
          if (!last.dimension.empty()) {
            const auto k = std::stoul(last.dimension);
            last.dimension = dims[k - 1].name;
          }
          return err("dimension '" + last.dimension + "': " + last.detail);
        });
    if (!out.value) return last;
    for (std::size_t i = 0; i < dims.size(); ++i) c.dimensions.push_back({dims[i].name, (*out.value)[i]});
  } else {
    for (const auto& d : dims) {
      auto req = base_request(gateway::purpose::kCaptionDimension,
                              fill(templates.t2i_dimension,
                                   {{"dimension_name", d.name}, {"dimension_prompt", d.prompt}}));
      auto out = gateway::ask_structured<std::string>(
          gw, std::move(req), options.ns, options.reask_budget,
          [](const std::string& text) -> Result<std::string, std::string> {
            auto t = text::trim(text);
            if (t.empty()) return err(std::string("empty description"));
            return std::string(t);
          });
      if (!out.value) return CaptionFailure{d.name, out.last_error};
      c.dimensions.push_back({d.name, *out.value});
    }
  }
  std::vector<std::string> parts;
  for (const auto& d : c.dimensions) parts.push_back(d.text);
  c.caption = text::join(parts, "\n\n");
  c.word_count = text::word_count(c.caption);
  return c;
}

}  // namespace dim::annotate
