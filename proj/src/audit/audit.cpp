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

#include "dim/audit/audit.hpp"

#include <limits>
#include <optional>

#include "dim/annotate/caption.hpp"
#include "dim/core/jsonl.hpp"
#include "dim/core/parallel.hpp"
#include "dim/core/text.hpp"

namespace dim::audit {

std::size_t word_count(std::string_view utf8) { return text::word_count(utf8); }

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::below(0)");
  // Largest multiple of n representable; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % n;
}

std::vector<std::size_t> reservoir_positions(std::size_t count, std::size_t k, std::uint64_t seed) {
  std::size_t i = 0;
  std::function<std::optional<std::size_t>()> next = [&]() -> std::optional<std::size_t> {
    if (i == count) return std::nullopt;
    return i++;
  };
  std::vector<std::size_t> out;
  for (auto& [pos, _] : reservoir_sample<std::size_t>(next, k, seed)) out.push_back(pos);
  return out;
}

Result<TierLabel, std::string> parse_tier_response(std::string_view response,
                                                   const std::string& judge_model) {
  std::optional<Tier> found;
  for (const auto& value : text::labeled_values(response, "TIER")) {
    auto t = parse_tier_name(value);
    if (!t) return std::string("unknown tier '" + value + "'");
    if (found && *found != *t) return std::string("conflicting TIER lines");
    found = t;
  }
  if (!found) return std::string("no 'TIER: <name>' line");
  std::vector<std::string> rest;
  for (auto line : text::split_lines(response)) {
    auto t = text::trim(line);
    if (!t.empty() && text::labeled_values(t, "TIER").empty()) rest.emplace_back(t);
  }
  return TierLabel{*found, judge_model, text::join(rest, "\n")};
}

std::array<double, kTierCount> TierDistribution::fractions() const {
  std::array<double, kTierCount> f{};
  if (sample_size == 0) return f;
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(sample_size);
  return f;
}

Json TierDistribution::to_json() const {
  Json c = Json::object(), fr = Json::object();
  const auto f = fractions();
  for (Tier t : {Tier::Low, Tier::Medium, Tier::High, Tier::UltraHigh}) {
    c[std::string(to_string(t))] = count(t);
    fr[std::string(to_string(t))] = f[static_cast<std::size_t>(t)];
  }
  return {{"counts", c},
          {"fractions", fr},
          {"sample_size", sample_size},
          {"unparseable", unparseable},
          {"failed", failed},
          {"requested", requested},
          {"seed", seed},
          {"complete", complete},
          {"members", members},
          {"per_sample", per_sample}};
}

TierDistribution judge_sample(const std::vector<DatasetRecord>& sample, gateway::Gateway& gw,
                              const annotate::PromptTemplateSet& templates, const AuditOptions& options) {
  enum class Kind { Label, Unparseable, Failed };
  struct Judged {
    Kind kind = Kind::Failed;
    Tier tier = Tier::Low;
  };
  std::vector<Judged> judged(sample.size());
  const std::string model = options.model_tag.empty() ? options.provider_tag : options.model_tag;

  parallel_for(sample.size(), options.workers, [&](std::size_t i) {
    const DatasetRecord& r = sample[i];
    gateway::ProviderRequest req;
    req.provider_tag = options.provider_tag;
    req.model_tag = model;
    req.purpose = std::string(gateway::purpose::kAudit);
    req.trace_id = r.pair_id() + "/audit";
    std::vector<gateway::ImageAttachment> images;
    bool with_images = false;
    if (options.images) {
      auto src = options.images->load(r.source_image().ref);
      auto tgt = options.images->load(r.target_image().ref);
      if (src && tgt) {
        images = {gateway::ImageAttachment::from_blob(*src), gateway::ImageAttachment::from_blob(*tgt)};
        with_images = true;
      }
    }
    req.messages.push_back(
        {"user",
         annotate::fill(templates.audit_tier,
                        {{"instruction", r.raw_instruction()},
                         {"blueprint", render_blueprint(r.blueprint())},
                         {"images", with_images ? annotate::describe_images(true)
                                                : std::string("No images are attached.")}}),
         std::move(images)});
    try {
      auto resp = gw.call(req, options.ns);
      auto label = parse_tier_response(resp.text, model);
      judged[i] = label.ok() ? Judged{Kind::Label, label->tier} : Judged{Kind::Unparseable, Tier::Low};
    } catch (const gateway::ProviderError&) {
      judged[i] = Judged{Kind::Failed, Tier::Low};
    }
  });

  TierDistribution d;
  d.requested = sample.size();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& id = sample[i].pair_id();
    d.members.push_back(id);
    switch (judged[i].kind) {
      case Kind::Label:
        ++d.counts[static_cast<std::size_t>(judged[i].tier)];
        ++d.sample_size;
        d.per_sample[id] = std::string(to_string(judged[i].tier));
        break;
      case Kind::Unparseable:
        ++d.unparseable;
        d.per_sample[id] = "unparseable";
        break;
      case Kind::Failed:
        ++d.failed;
        d.complete = false;
        d.per_sample[id] = "failed";
        break;
    }
  }
  return d;
}

TierDistribution audit_sample(const std::filesystem::path& dataset, std::size_t sample_size,
                              std::uint64_t seed, gateway::Gateway& gw,
                              const annotate::PromptTemplateSet& templates, const AuditOptions& options) {
  JsonlReader reader(dataset);
  std::function<std::optional<DatasetRecord>()> next = [&]() -> std::optional<DatasetRecord> {
    Json j;
    if (!reader.next(j)) return std::nullopt;
    try {
      check_schema_version(j);
      return decode<DatasetRecord>(j);
    } catch (const FormatError& e) {
      throw FormatError(dataset.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what());
    }
  };
  std::vector<DatasetRecord> sample;
  for (auto& [_, r] : reservoir_sample<DatasetRecord>(next, sample_size, seed)) sample.push_back(std::move(r));
  auto d = judge_sample(sample, gw, templates, options);
  d.seed = seed;
  return d;
}

std::string_view to_string(FieldSelector f) {
  switch (f) {
    case FieldSelector::RawInstruction: return "raw_instruction";
    case FieldSelector::OptimizedInstruction: return "optimized_instruction";
    case FieldSelector::FullBlueprint: return "full_blueprint";
  }
  return "?";
}

FieldSelector parse_field_selector(std::string_view s) {
  for (FieldSelector f : {FieldSelector::RawInstruction, FieldSelector::OptimizedInstruction,
                          FieldSelector::FullBlueprint}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown field selector '" + std::string(s) + "'");
}

std::size_t selected_word_count(const DatasetRecord& r, FieldSelector f) {
  switch (f) {
    case FieldSelector::RawInstruction: return word_count(r.raw_instruction());
    case FieldSelector::OptimizedInstruction: return word_count(r.blueprint().optimized_instruction());
    case FieldSelector::FullBlueprint: {
      std::size_t n = word_count(r.blueprint().optimized_instruction());
      for (const auto& s : r.blueprint().steps()) n += word_count(s);
      return n;
    }
  }
  return 0;
}

void CorpusStats::add(const std::string& source, std::size_t words) {
  ++record_count;
  total_words += words;
  auto& s = per_source[source];
  ++s.record_count;
  s.total_words += words;
}

Json CorpusStats::to_json() const {
  Json ps = Json::object();
  for (const auto& [name, s] : per_source) {
    ps[name] = {{"record_count", s.record_count},
                {"total_words", s.total_words},
                {"average_prompt_length", s.average_prompt_length()}};
  }
  return {{"field", field},
          {"record_count", record_count},
          {"total_words", total_words},
          {"average_prompt_length", average_prompt_length()},
          {"empty", empty()},
          {"per_source", ps}};
}

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records, FieldSelector f) {
  CorpusStats s;
  s.field = std::string(to_string(f));
  for (const auto& r : records) s.add(r.source_dataset().name(), selected_word_count(r, f));
  return s;
}

CorpusStats corpus_stats(const std::filesystem::path& dataset, FieldSelector f) {
  CorpusStats s;
  s.field = std::string(to_string(f));
  for_each_line<DatasetRecord>(dataset, [&](DatasetRecord r) {
    s.add(r.source_dataset().name(), selected_word_count(r, f));
  });
  return s;
}

CorpusStats caption_stats(const std::filesystem::path& captions) {
  CorpusStats s;
  s.field = "caption";
  JsonlReader reader(captions);
  Json j;
  while (reader.next(j)) {
    check_schema_version(j);
    const auto c = annotate::LongCaption::from_json(j);
    s.add("t2i", word_count(c.caption));
  }
  return s;
}

}  // namespace dim::audit
