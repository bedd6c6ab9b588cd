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

#include <optional>
#include <string>
#include <string_view>

#include "dim/core/blueprint.hpp"
#include "dim/core/result.hpp"
#include "dim/core/types.hpp"

namespace dim::annotate {

// Requires a `VERDICT: <Misaligned|PartiallyAligned|Aligned>` line. Several
// VERDICT lines that disagree make the answer unparseable. The rationale is
// everything else, trimmed.
Result<AlignmentVerdict, std::string> parse_verdict_response(std::string_view response,
                                                             const std::string& judge_model);

// Strips a leading label ("Instruction:", "Rewritten instruction:") and
// surrounding quotes. Error when nothing is left.
Result<std::string, std::string> parse_optimized_response(std::string_view response);

// Section parse plus validate_blueprint. When `instruction` is given it
// replaces whatever INSTRUCTION line the response carried.
Result<BlueprintCoT, SchemaError> parse_cot_response(std::string_view response,
                                                     const std::string& generator_model,
                                                     const std::optional<std::string>& instruction);

}  // namespace dim::annotate
