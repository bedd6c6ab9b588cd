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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dim/annotate/checkpoint.hpp"
#include "dim/annotate/templates.hpp"
#include "dim/core/image.hpp"
#include "dim/core/record.hpp"
#include "dim/core/result.hpp"
#include "dim/gateway/gateway.hpp"
#include "dim/simfilter/filter.hpp"

namespace dim::annotate {

// Reasons stored on Failed pairs.
namespace failure {
inline constexpr const char* kUnparseableVerdict = "unparseable_verdict";
inline constexpr const char* kEmptyOptimization = "empty_optimization";
inline constexpr const char* kUnparseableCot = "unparseable_cot";
inline constexpr const char* kImageUnavailable = "image_unavailable";
inline constexpr const char* kProviderError = "provider_error";  // followed by ":<kind>"
}  // namespace failure

struct AnnotateOptions {
  std::string provider_tag;
  std::string model_tag;
  std::string ns = "annotate";
  std::size_t workers = 4;
  int reask_budget = 2;
  double temperature = 0.0;  // verdict and optimization
  double cot_temperature = 0.0;
  bool retry_failed = false;
  std::string created_at;  // empty: run_timestamp()
};

struct OptimizeOutcome {
  bool discard = false;
  std::optional<std::string> text;
  std::string failure;  // set when neither discarded nor optimized
  int asks = 0;
};

template <typename T>
struct StageOutcome {
  Result<T, std::string> result;
  int asks = 0;
};

struct AnnotateSummary {
  std::size_t input = 0;
  std::map<Stage, std::size_t> counts;
  std::vector<std::pair<std::string, std::string>> failed;  // pair_id, reason
  std::size_t emitted = 0;
  std::string pipeline_version;

  std::size_t count(Stage s) const {
    auto it = counts.find(s);
    return it == counts.end() ? 0 : it->second;
  }
  // True when CoTDone, Discarded and Failed together cover the input.
  bool partitioned() const;
  Json to_json() const;
};

struct AnnotateRun {
  AnnotateSummary summary;
  std::vector<DatasetRecord> records;  // pair_id order
};

class Annotator {
 public:
  Annotator(gateway::Gateway& gw, PromptTemplateSet templates, const ImageSource& images,
            AnnotateOptions options);

  StageOutcome<AlignmentVerdict> judge_alignment(const EditPair& pair);
  // Misaligned pairs are discarded without a provider call.
  OptimizeOutcome optimize_instruction(const EditPair& pair, const AlignmentVerdict& verdict);
  StageOutcome<BlueprintCoT> generate_cot(const EditPair& pair, const std::string& optimized,
                                          bool include_target);

  // Drives one pair from its checkpointed stage to a terminal stage.
  PairState advance(const EditPair& pair, CheckpointStore& store);

  // Runs every pair (bounded parallelism) and assembles the records of the
  // CoTDone pairs, re-validating each blueprint on the way out.
  AnnotateRun run(const std::vector<simfilter::ScoredPair>& input, CheckpointStore& store);

  const std::string& pipeline_version() const { return pipeline_version_; }
  const PromptTemplateSet& templates() const { return templates_; }

 private:
  std::vector<gateway::ImageAttachment> attachments(const EditPair& pair, bool include_target) const;
  gateway::ProviderRequest request(std::string_view purpose, std::string text,
                                   std::vector<gateway::ImageAttachment> images,
                                   double temperature, const std::string& trace) const;

  gateway::Gateway& gw_;
  PromptTemplateSet templates_;
  const ImageSource& images_;
  AnnotateOptions options_;
  std::string pipeline_version_;
};

// Thrown by Annotator when an image cannot be loaded or no longer matches
// its recorded digest.
class ImageUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dim::annotate
