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
#include <string_view>

#include <json.hpp>

#include "dim/core/blueprint.hpp"
#include "dim/core/record.hpp"
#include "dim/core/types.hpp"

namespace dim {

using Json = nlohmann::json;

// Every JSON-lines record carries this; readers reject other major versions.
inline constexpr std::string_view kSchemaVersion = "1.0";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json encode(const ImageRef& v);
Json encode(const EditPair& v);
Json encode(const FilterScores& v);
Json encode(const AlignmentVerdict& v);
Json encode(const BlueprintCoT& v);
Json encode(const DatasetRecord& v);
Json encode(const TierLabel& v);
Json encode(const JudgeScore& v);

// decode<T> throws FormatError on any missing field, wrong type, or violated
// invariant.
template <typename T>
T decode(const Json& j);

template <> ImageRef decode<ImageRef>(const Json& j);
template <> EditPair decode<EditPair>(const Json& j);
template <> FilterScores decode<FilterScores>(const Json& j);
template <> AlignmentVerdict decode<AlignmentVerdict>(const Json& j);
template <> BlueprintCoT decode<BlueprintCoT>(const Json& j);
template <> DatasetRecord decode<DatasetRecord>(const Json& j);
template <> TierLabel decode<TierLabel>(const Json& j);
template <> JudgeScore decode<JudgeScore>(const Json& j);

// Adds `schema_version` to a top-level object.
Json with_schema_version(Json j);
// Throws FormatError when `schema_version` is absent or of another major.
void check_schema_version(const Json& j);

template <typename T>
std::string to_line(const T& v) {
  return with_schema_version(encode(v)).dump();
}

template <typename T>
T from_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  check_schema_version(j);
  return decode<T>(j);
}

bool is_rfc3339_utc(std::string_view s);

}  // namespace dim
