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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dim/annotate/templates.hpp"
#include "dim/core/image.hpp"
#include "dim/core/record.hpp"
#include "dim/core/result.hpp"
#include "dim/core/serialize.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::audit {

// Maximal runs of non-whitespace (Unicode White_Space) code points.
std::size_t word_count(std::string_view utf8);

// Uniform integers in [0, n) by rejection, so the sequence depends only on
// the seed and not on the standard library's distribution code.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Algorithm R over a stream of `count` items. Returns the chosen stream
// positions in increasing order. Throws std::invalid_argument when k > count.
std::vector<std::size_t> reservoir_positions(std::size_t count, std::size_t k, std::uint64_t seed);

// Same selection, but over a stream whose length is not known in advance:
// `next` yields items until it returns nullopt.
template <typename T>
std::vector<std::pair<std::size_t, T>> reservoir_sample(const std::function<std::optional<T>()>& next,
                                                        std::size_t k, std::uint64_t seed);

Result<TierLabel, std::string> parse_tier_response(std::string_view response,
                                                   const std::string& judge_model);

struct TierDistribution {
  std::array<std::size_t, kTierCount> counts{};
  std::size_t sample_size = 0;   // judged and classified
  std::size_t unparseable = 0;
  std::size_t failed = 0;        // provider errors
  std::size_t requested = 0;
  std::uint64_t seed = 0;
  bool complete = true;          // false when any judgment failed
  std::vector<std::string> members;                 // sampled pair_ids, stream order
  std::map<std::string, std::string> per_sample;    // pair_id -> tier or "unparseable"/"failed"

  std::size_t count(Tier t) const { return counts[static_cast<std::size_t>(t)]; }
  std::array<double, kTierCount> fractions() const;
  Json to_json() const;
};

struct AuditOptions {
  std::string provider_tag;
  std::string model_tag;
  std::string ns = "audit";
  std::size_t workers = 4;
  const ImageSource* images = nullptr;  // attach source and edited image when set
};

// Judges an already drawn sample.
TierDistribution judge_sample(const std::vector<DatasetRecord>& sample, gateway::Gateway& gw,
                              const annotate::PromptTemplateSet& templates, const AuditOptions& options);

// Streams the dataset file, draws `sample_size` records with the seed and
// judges them. Throws std::invalid_argument when the file has fewer records.
TierDistribution audit_sample(const std::filesystem::path& dataset, std::size_t sample_size,
                              std::uint64_t seed, gateway::Gateway& gw,
                              const annotate::PromptTemplateSet& templates, const AuditOptions& options);

enum class FieldSelector { RawInstruction, OptimizedInstruction, FullBlueprint };
std::string_view to_string(FieldSelector f);
FieldSelector parse_field_selector(std::string_view s);  // throws std::invalid_argument

// Text measured by the selector. full_blueprint is the optimized instruction
// plus the four step texts, without headers.
std::size_t selected_word_count(const DatasetRecord& r, FieldSelector f);

struct CorpusStats {
  struct SourceStats {
    std::size_t record_count = 0;
    std::size_t total_words = 0;
    double average_prompt_length() const {
      return record_count == 0 ? 0.0 : static_cast<double>(total_words) / static_cast<double>(record_count);
    }
  };
  std::string field;
  std::size_t record_count = 0;
  std::size_t total_words = 0;
  std::map<std::string, SourceStats> per_source;

  bool empty() const { return record_count == 0; }
  double average_prompt_length() const {
    return record_count == 0 ? 0.0 : static_cast<double>(total_words) / static_cast<double>(record_count);
  }
  void add(const std::string& source, std::size_t words);
  Json to_json() const;
};

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records, FieldSelector f);
CorpusStats corpus_stats(const std::filesystem::path& dataset, FieldSelector f);
// APL over the caption text of a caption file (field "caption").
CorpusStats caption_stats(const std::filesystem::path& captions);

template <typename T>
std::vector<std::pair<std::size_t, T>> reservoir_sample(const std::function<std::optional<T>()>& next,
                                                        std::size_t k, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<std::pair<std::size_t, T>> reservoir;
  reservoir.reserve(k);
  std::size_t i = 0;
  while (auto item = next()) {
    if (i < k) {
      reservoir.emplace_back(i, std::move(*item));
    } else {
      const auto j = rng.below(i + 1);
      if (j < k) reservoir[j] = {i, std::move(*item)};
    }
    ++i;
  }
  if (reservoir.size() < k)
    throw std::invalid_argument("sample size " + std::to_string(k) + " exceeds dataset size " +
                                std::to_string(i));
  std::sort(reservoir.begin(), reservoir.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return reservoir;
}

}  // namespace dim::audit
