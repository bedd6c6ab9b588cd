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

#include "dim/core/record.hpp"

#include <stdexcept>

namespace dim {

Result<DatasetRecord, std::string> DatasetRecord::create(const EditPair& pair, FilterScores scores,
                                                         AlignmentVerdict verdict,
                                                         BlueprintCoT blueprint,
                                                         std::string pipeline_version,
                                                         std::string created_at) {
  if (verdict.verdict == Verdict::Misaligned)
    return std::string("misaligned pairs cannot become dataset records");
  if (pair.pair_id.empty()) return std::string("record needs a pair_id");
  try {
    check_filter_scores(scores, pair.raw_instruction);
  } catch (const std::invalid_argument& e) {
    return std::string(e.what());
  }
  DatasetRecord r(std::move(blueprint));
  r.pair_id_ = pair.pair_id;
  r.source_dataset_ = pair.source_dataset;
  r.raw_instruction_ = pair.raw_instruction;
  r.source_image_ = pair.source_image;
  r.target_image_ = pair.target_image;
  r.filter_scores_ = std::move(scores);
  r.verdict_ = std::move(verdict);
  r.pipeline_version_ = std::move(pipeline_version);
  r.created_at_ = std::move(created_at);
  return r;
}

}  // namespace dim
