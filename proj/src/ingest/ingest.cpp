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

#include "dim/ingest/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dim/core/jsonl.hpp"
#include "dim/core/parallel.hpp"
#include "dim/core/text.hpp"

namespace dim::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string required_string(const json& j, const char* key, std::size_t index) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ManifestError("entry " + std::to_string(index) + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

}  // namespace

SourceManifest SourceManifest::from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");
  SourceManifest m;
  auto src = j.find("source_dataset");
  if (src == j.end() || !src->is_string() || src->get<std::string>().empty())
    throw ManifestError("manifest needs a 'source_dataset' string");
  m.source_dataset = SourceDataset::parse(src->get<std::string>());
  auto entries = j.find("entries");
  if (entries == j.end() || !entries->is_array()) throw ManifestError("manifest needs an 'entries' array");
  m.entries.reserve(entries->size());
  std::size_t i = 0;
  for (const auto& e : *entries) {
    if (!e.is_object()) throw ManifestError("entry " + std::to_string(i) + " is not an object");
    ManifestEntry entry;
    entry.source_image_ref = required_string(e, "source_image", i);
    entry.target_image_ref = required_string(e, "target_image", i);
    entry.raw_instruction = required_string(e, "raw_instruction", i);
    if (auto md = e.find("metadata"); md != e.end()) {
      if (!md->is_object()) throw ManifestError("entry " + std::to_string(i) + ": metadata must be an object");
      for (const auto& [k, v] : md->items()) {
        entry.extra_metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    m.entries.push_back(std::move(entry));
    ++i;
  }
  m.declared_count = m.entries.size();
  if (auto dc = j.find("declared_count"); dc != j.end()) {
    if (!dc->is_number_unsigned()) throw ManifestError("declared_count must be a non-negative integer");
    m.declared_count = dc->get<std::size_t>();
    if (m.declared_count != m.entries.size())
      throw ManifestError("declared_count " + std::to_string(m.declared_count) + " != " +
                          std::to_string(m.entries.size()) + " entries");
  }
  return m;
}

SourceManifest SourceManifest::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ManifestError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ManifestError(e.what());
  }
  return from_json(j);
}

json SourceManifest::to_json() const {
  json entries_json = json::array();
  for (const auto& e : entries) {
    json item{{"source_image", e.source_image_ref},
              {"target_image", e.target_image_ref},
              {"raw_instruction", e.raw_instruction}};
    if (!e.extra_metadata.empty()) item["metadata"] = e.extra_metadata;
    entries_json.push_back(std::move(item));
  }
  return {{"source_dataset", source_dataset.name()},
          {"declared_count", entries.size()},
          {"entries", std::move(entries_json)}};
}

SelectionRules SelectionRules::defaults() {
  SelectionRules r;
  r.per_source[SourceDataset::Kind::UltraEdit] = SourceRule{};
  SourceRule magicbrush;
  magicbrush.split = "train";
  r.per_source[SourceDataset::Kind::MagicBrush] = magicbrush;
  SourceRule seed;
  seed.required_keyword = "remove";
  seed.keyword_match = KeywordMatch::WholeWord;
  r.per_source[SourceDataset::Kind::SeedEditPart3] = seed;
  SourceRule sharegpt;
  sharegpt.subset = "image-to-image";
  r.per_source[SourceDataset::Kind::ShareGPT4oImage] = sharegpt;
  return r;
}

SelectionRules SelectionRules::from_json(const json& j) {
  if (!j.is_object()) throw ManifestError("rules must be a JSON object");
  const json& sources = j.contains("sources") ? j.at("sources") : j;
  if (!sources.is_object()) throw ManifestError("rules 'sources' must be an object");
  SelectionRules r;
  for (const auto& [name, spec] : sources.items()) {
    if (!spec.is_object()) throw ManifestError("rule for " + name + " must be an object");
    SourceRule rule;
    try {
      if (spec.contains("split")) rule.split = spec.at("split").get<std::string>();
      if (spec.contains("required_keyword"))
        rule.required_keyword = spec.at("required_keyword").get<std::string>();
      if (spec.contains("keyword_match")) {
        const auto mode = spec.at("keyword_match").get<std::string>();
        if (mode == "whole_word") rule.keyword_match = KeywordMatch::WholeWord;
        else if (mode == "substring") rule.keyword_match = KeywordMatch::Substring;
        else throw ManifestError("unknown keyword_match '" + mode + "'");
      }
      if (spec.contains("subset")) rule.subset = spec.at("subset").get<std::string>();
      rule.resolution_gate = spec.value("resolution_gate", false);
    } catch (const json::exception& e) {
      throw ManifestError("rule for " + name + ": " + e.what());
    }
    r.per_source[SourceDataset::parse(name)] = std::move(rule);
  }
  return r;
}

SelectionRules SelectionRules::load(const fs::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ManifestError(path.string() + ": " + e.what());
  } catch (const ManifestError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ManifestError(e.what());
  }
}

json SelectionRules::to_json() const {
  json sources = json::object();
  for (const auto& [src, rule] : per_source) {
    json r = json::object();
    if (rule.split) r["split"] = *rule.split;
    if (rule.required_keyword) {
      r["required_keyword"] = *rule.required_keyword;
      r["keyword_match"] = rule.keyword_match == KeywordMatch::WholeWord ? "whole_word" : "substring";
    }
    if (rule.subset) r["subset"] = *rule.subset;
    if (rule.resolution_gate) r["resolution_gate"] = true;
    sources[src.name()] = std::move(r);
  }
  return {{"sources", sources}};
}

const SourceRule* SelectionRules::rule_for(const SourceDataset& s) const {
  auto it = per_source.find(s);
  return it == per_source.end() ? nullptr : &it->second;
}

std::size_t IngestReport::dropped() const {
  std::size_t n = 0;
  for (const auto& [_, c] : dropped_by_rule) n += c;
  return n;
}

json IngestReport::to_json() const {
  return {{"source_dataset", source.name()},
          {"read", read},
          {"kept", kept},
          {"dropped", dropped()},
          {"dropped_by_rule", dropped_by_rule}};
}

std::string_view to_string(GateResult g) {
  switch (g) {
    case GateResult::Pass: return "pass";
    case GateResult::TooSmall: return "too_small";
    case GateResult::Unreadable: return "unreadable";
  }
  return "?";
}

GateResult resolution_gate(int width, int height) {
  if (width <= 0 || height <= 0) return GateResult::Unreadable;
  return width > 512 && height > 512 ? GateResult::Pass : GateResult::TooSmall;
}

GateResult resolution_gate(const std::optional<ImageBlob>& image) {
  if (!image) return GateResult::Unreadable;
  return resolution_gate(image->width, image->height);
}

IngestResult ingest_source(const SourceManifest& manifest, const SelectionRules& rules,
                           const ImageSource& images, std::size_t workers) {
  const SourceRule none{};
  const SourceRule* found = rules.rule_for(manifest.source_dataset);
  const SourceRule& rule = found ? *found : none;

  struct Outcome {
    std::optional<EditPair> pair;
    const char* dropped = nullptr;
  };
  std::vector<Outcome> outcomes(manifest.entries.size());

  parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    Outcome& out = outcomes[i];
    auto meta = [&](const char* key) -> std::optional<std::string> {
      auto it = e.extra_metadata.find(key);
      if (it == e.extra_metadata.end()) return std::nullopt;
      return it->second;
    };
    if (rule.split && meta("split") != rule.split) {
      out.dropped = rule::kSplit;
      return;
    }
    if (rule.subset && meta("subset") != rule.subset) {
      out.dropped = rule::kSubset;
      return;
    }
    if (rule.required_keyword) {
      const bool hit = rule.keyword_match == KeywordMatch::WholeWord
                           ? text::contains_whole_word(e.raw_instruction, *rule.required_keyword)
                           : text::contains_lower(e.raw_instruction, text::to_lower(*rule.required_keyword));
      if (!hit) {
        out.dropped = rule::kKeyword;
        return;
      }
    }
    auto src = images.load(e.source_image_ref);
    auto tgt = images.load(e.target_image_ref);
    if (!src || !tgt || src->width <= 0 || tgt->width <= 0 || e.raw_instruction.empty()) {
      out.dropped = rule::kUnreadable;
      return;
    }
    if (rule.resolution_gate &&
        (resolution_gate(src) != GateResult::Pass || resolution_gate(tgt) != GateResult::Pass)) {
      out.dropped = rule::kResolution;
      return;
    }
    EditPair p;
    p.pair_id = stable_pair_id(*src->bytes, *tgt->bytes, e.raw_instruction);
    p.source_image = src->as_ref();
    p.target_image = tgt->as_ref();
    p.raw_instruction = e.raw_instruction;
    p.source_dataset = manifest.source_dataset;
    p.metadata = e.extra_metadata;
    out.pair = std::move(p);
  });

  IngestResult result;
  result.report.source = manifest.source_dataset;
  result.report.read = manifest.entries.size();
  for (auto& o : outcomes) {
    if (o.pair) {
      result.pairs.push_back(std::move(*o.pair));
    } else {
      ++result.report.dropped_by_rule[o.dropped];
    }
  }
  // Stable sort keeps the first manifest occurrence of a duplicated pair.
  std::stable_sort(result.pairs.begin(), result.pairs.end(),
                   [](const EditPair& a, const EditPair& b) { return a.pair_id < b.pair_id; });
  auto last = std::unique(result.pairs.begin(), result.pairs.end(),
                          [](const EditPair& a, const EditPair& b) { return a.pair_id == b.pair_id; });
  if (const auto dups = static_cast<std::size_t>(std::distance(last, result.pairs.end())); dups > 0) {
    result.report.dropped_by_rule[rule::kDuplicate] += dups;
    result.pairs.erase(last, result.pairs.end());
  }
  result.report.kept = result.pairs.size();
  return result;
}

json MixtureSummary::to_json() const {
  json per_source = json::object();
  for (const auto& [src, n] : kept) per_source[src.name()] = n;
  return {{"kept", per_source}, {"total", total}};
}

MixtureSummary mixture_totals(const std::vector<IngestReport>& reports) {
  MixtureSummary s;
  for (const auto& r : reports) {
    if (!s.kept.emplace(r.source, r.kept).second)
      throw std::invalid_argument("duplicate source in mixture: " + r.source.name());
    s.total += r.kept;
  }
  return s;
}

SourceManifest manifest_from_dir(const fs::path& dir, const SourceDataset& source,
                                 const std::map<std::string, std::string>& metadata) {
  if (!fs::is_directory(dir)) throw ManifestError(dir.string() + " is not a directory");
  std::map<std::string, std::map<std::string, fs::path>> by_stem;
  for (const auto& ent : fs::directory_iterator(dir)) {
    if (!ent.is_regular_file()) continue;
    const auto stem = ent.path().stem().string();
    const auto ext = ent.path().extension().string();
    if (ext == ".txt") {
      by_stem[stem]["instruction"] = ent.path();
    } else if (stem.size() > 7 && stem.ends_with("_source")) {
      by_stem[stem.substr(0, stem.size() - 7)]["source"] = ent.path();
    } else if (stem.size() > 7 && stem.ends_with("_target")) {
      by_stem[stem.substr(0, stem.size() - 7)]["target"] = ent.path();
    }
  }
  SourceManifest m;
  m.source_dataset = source;
  for (const auto& [stem, files] : by_stem) {
    if (files.size() != 3) continue;
    ManifestEntry e;
    e.source_image_ref = files.at("source").string();
    e.target_image_ref = files.at("target").string();
    e.raw_instruction = std::string(text::trim(read_file(files.at("instruction"))));
    e.extra_metadata = metadata;
    m.entries.push_back(std::move(e));
  }
  m.declared_count = m.entries.size();
  return m;
}

}  // namespace dim::ingest
