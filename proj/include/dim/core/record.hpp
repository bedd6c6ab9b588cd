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

#include <string>
#include <utility>

#include "dim/core/blueprint.hpp"
#include "dim/core/result.hpp"
#include "dim/core/types.hpp"

namespace dim {

// One finished dataset entry. Records carry image references, never pixels.
// A Misaligned verdict cannot be wrapped into a record.
class DatasetRecord {
 public:
  static Result<DatasetRecord, std::string> create(const EditPair& pair, FilterScores scores,
                                                   AlignmentVerdict verdict, BlueprintCoT blueprint,
                                                   std::string pipeline_version,
                                                   std::string created_at);

  const std::string& pair_id() const { return pair_id_; }
  const SourceDataset& source_dataset() const { return source_dataset_; }
  const std::string& raw_instruction() const { return raw_instruction_; }
  const ImageRef& source_image() const { return source_image_; }
  const ImageRef& target_image() const { return target_image_; }
  const FilterScores& filter_scores() const { return filter_scores_; }
  const AlignmentVerdict& verdict() const { return verdict_; }
  const BlueprintCoT& blueprint() const { return blueprint_; }
  const std::string& pipeline_version() const { return pipeline_version_; }
  const std::string& created_at() const { return created_at_; }

  bool operator==(const DatasetRecord&) const = default;

 private:
  DatasetRecord(BlueprintCoT bp) : blueprint_(std::move(bp)) {}

  std::string pair_id_;
  SourceDataset source_dataset_;
  std::string raw_instruction_;
  ImageRef source_image_;
  ImageRef target_image_;
  FilterScores filter_scores_;
  AlignmentVerdict verdict_;
  BlueprintCoT blueprint_;
  std::string pipeline_version_;
  std::string created_at_;
};

}  // namespace dim
