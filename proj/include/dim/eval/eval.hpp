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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dim/annotate/templates.hpp"
#include "dim/core/image.hpp"
#include "dim/core/result.hpp"
#include "dim/core/serialize.hpp"
#include "dim/core/types.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::eval {

enum class BenchmarkStyle { ImgEdit9, GEditEN11 };
std::string_view to_string(BenchmarkStyle s);
BenchmarkStyle parse_style(std::string_view s);  // throws std::invalid_argument

// Task tags in table column order.
const std::vector<std::string>& task_tags(BenchmarkStyle s);
bool is_task(BenchmarkStyle s, std::string_view tag);
double scale_max(BenchmarkStyle s);  // 5 and 10

struct EvalSample {
  std::string sample_id;
  std::string task;
  std::string source_image_ref;
  std::string instruction;
  std::string edited_image_ref;
  bool operator==(const EvalSample&) const = default;
};

struct EvalSubmission {
  BenchmarkStyle style = BenchmarkStyle::ImgEdit9;
  std::vector<EvalSample> samples;

  // Throws FormatError on malformed input, unknown task tags or repeated ids.
  static EvalSubmission from_json(const Json& j);
  static EvalSubmission load(const std::filesystem::path& path);
  Json to_json() const;
};

// `SCORE: <number>`, plus optional `SC:` / `PQ:` lines. Every number must lie
// in [0, scale_max].
Result<JudgeScore, std::string> parse_judge_response(std::string_view response, BenchmarkStyle style,
                                                     const EvalSample& sample, const std::string& judge_model);

struct JudgeOptions {
  std::string judge_tag;
  std::string model_tag;
  std::string ns = "evaluate";
  int reask_budget = 1;
};

// Error holds the sample id's failure reason.
Result<JudgeScore, std::string> judge_sample(gateway::Gateway& gw, const EvalSample& sample,
                                             BenchmarkStyle style, const ImageSource& images,
                                             const annotate::PromptTemplateSet& templates,
                                             const JudgeOptions& options);

struct EvalReport {
  BenchmarkStyle style = BenchmarkStyle::ImgEdit9;
  double scale_max = 5.0;
  std::map<std::string, double> task_means;        // present tasks only
  std::vector<std::string> absent_tasks;           // tag order
  double overall = 0.0;                            // mean of task means
  std::map<std::string, double> overall_excluding;
  std::vector<JudgeScore> per_sample;
  std::vector<std::pair<std::string, std::string>> failed;  // sample_id, reason
  bool partial = false;

  Json to_json() const;
  // Aligned table in the benchmark's column order, values to two decimals.
  std::string to_table(const std::string& row_label) const;
};

// Per-task means, then the unweighted mean over tasks. Throws
// std::invalid_argument for a score outside its range or an unknown task.
EvalReport aggregate(const std::vector<JudgeScore>& scores, BenchmarkStyle style);

}  // namespace dim::eval
