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

#include "dim/eval/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "dim/core/jsonl.hpp"
#include "dim/core/text.hpp"
#include "dim/gateway/structured.hpp"

namespace dim::eval {

std::string_view to_string(BenchmarkStyle s) {
  return s == BenchmarkStyle::ImgEdit9 ? "imgedit9" : "gedit11";
}

BenchmarkStyle parse_style(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "imgedit9" || l == "imgedit") return BenchmarkStyle::ImgEdit9;
  if (l == "gedit11" || l == "gediten11" || l == "gedit-en11" || l == "gedit") return BenchmarkStyle::GEditEN11;
  throw std::invalid_argument("unknown benchmark style '" + std::string(s) + "'");
}

const std::vector<std::string>& task_tags(BenchmarkStyle s) {
  static const std::vector<std::string> imgedit{"Add", "Adjust", "Extract", "Replace", "Remove",
                                                "Background", "Style", "Hybrid", "Action"};
  static const std::vector<std::string> gedit{"BC", "CA", "MA", "MC", "PH", "SC",
                                              "SA", "SRM", "SRP", "TC", "TT"};
  return s == BenchmarkStyle::ImgEdit9 ? imgedit : gedit;
}

bool is_task(BenchmarkStyle s, std::string_view tag) {
  for (const auto& t : task_tags(s)) {
    if (t == tag) return true;
  }
  return false;
}

double scale_max(BenchmarkStyle s) { return s == BenchmarkStyle::ImgEdit9 ? 5.0 : 10.0; }

EvalSubmission EvalSubmission::from_json(const Json& j) {
  try {
    EvalSubmission sub;
    sub.style = parse_style(j.at("benchmark_style").get<std::string>());
    std::set<std::string> ids;
    for (const auto& s : j.at("samples")) {
      EvalSample e{s.at("sample_id").get<std::string>(), s.at("task").get<std::string>(),
                   s.at("source_image").get<std::string>(), s.at("instruction").get<std::string>(),
                   s.at("edited_image").get<std::string>()};
      if (!is_task(sub.style, e.task))
        throw FormatError("task '" + e.task + "' is not a " + std::string(to_string(sub.style)) + " task");
      if (!ids.insert(e.sample_id).second) throw FormatError("repeated sample_id " + e.sample_id);
      sub.samples.push_back(std::move(e));
    }
    return sub;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("submission: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("submission: ") + e.what());
  }
}

EvalSubmission EvalSubmission::load(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

Json EvalSubmission::to_json() const {
  Json samples_json = Json::array();
  for (const auto& s : samples) {
    samples_json.push_back({{"sample_id", s.sample_id},
                            {"task", s.task},
                            {"source_image", s.source_image_ref},
                            {"instruction", s.instruction},
                            {"edited_image", s.edited_image_ref}});
  }
  return {{"benchmark_style", to_string(style)}, {"samples", samples_json}};
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  s = text::trim(s);
  // "4.5/5" and "4.5 out of 5" keep the leading number.
  std::size_t end = 0;
  while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                            (end == 0 && (s[end] == '-' || s[end] == '+'))))
    ++end;
  if (end == 0) return std::nullopt;
  double v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + end, v);
  if (ec != std::errc() || ptr != s.data() + end || !std::isfinite(v)) return std::nullopt;
  return v;
}

Result<std::optional<double>, std::string> single_value(std::string_view response, std::string_view label,
                                                        double max) {
  const auto values = text::labeled_values(response, label);
  if (values.empty()) return std::optional<double>{};
  std::optional<double> found;
  for (const auto& v : values) {
    auto n = parse_number(v);
    if (!n) return err("unparseable " + std::string(label) + " value '" + v + "'");
    if (found && *found != *n) return err("conflicting " + std::string(label) + " lines");
    found = n;
  }
  if (*found < 0.0 || *found > max)
    return err(std::string(label) + " " + std::to_string(*found) + " outside [0, " + std::to_string(max) + "]");
  return found;
}

}  // namespace

Result<JudgeScore, std::string> parse_judge_response(std::string_view response, BenchmarkStyle style,
                                                     const EvalSample& sample, const std::string& judge_model) {
  const double max = scale_max(style);
  auto score = single_value(response, "SCORE", max);
  if (!score.ok()) return err(score.error());
  if (!score.value()) return err(std::string("no 'SCORE: <number>' line"));
  auto sc = single_value(response, "SC", max);
  if (!sc.ok()) return err(sc.error());
  auto pq = single_value(response, "PQ", max);
  if (!pq.ok()) return err(pq.error());
  JudgeScore js;
  js.sample_id = sample.sample_id;
  js.task = sample.task;
  js.score = *score.value();
  js.scale_max = max;
  js.judge_model = judge_model;
  js.semantic_consistency = sc.value();
  js.perceptual_quality = pq.value();
  return js;
}

Result<JudgeScore, std::string> judge_sample(gateway::Gateway& gw, const EvalSample& sample,
                                             BenchmarkStyle style, const ImageSource& images,
                                             const annotate::PromptTemplateSet& templates,
                                             const JudgeOptions& options) {
  auto src = images.load(sample.source_image_ref);
  auto edited = images.load(sample.edited_image_ref);
  if (!src || !edited) return err(std::string("image_unavailable"));
  gateway::ProviderRequest req;
  req.provider_tag = options.judge_tag;
  req.model_tag = options.model_tag.empty() ? options.judge_tag : options.model_tag;
  req.purpose = std::string(style == BenchmarkStyle::ImgEdit9 ? gateway::purpose::kJudgeImgEdit
                                                              : gateway::purpose::kJudgeGEdit);
  req.trace_id = sample.sample_id + "/judge";
  req.messages.push_back(
      {"user",
       annotate::fill(style == BenchmarkStyle::ImgEdit9 ? templates.judge_imgedit9 : templates.judge_gedit11,
                      {{"task", sample.task},
                       {"instruction", sample.instruction},
                       {"images", "Two images are attached: the source image, then the edited image."}}),
       {gateway::ImageAttachment::from_blob(*src), gateway::ImageAttachment::from_blob(*edited)}});
  const std::string model = req.model_tag;
  try {
    auto out = gateway::ask_structured<JudgeScore>(
        gw, std::move(req), options.ns, options.reask_budget,
        [&](const std::string& text) { return parse_judge_response(text, style, sample, model); });
    if (out.value) return std::move(*out.value);
    return err("unparseable_score: " + out.last_error);
  } catch (const gateway::ProviderError& e) {
    return err("provider_error:" + std::string(gateway::to_string(e.kind())));
  }
}

EvalReport aggregate(const std::vector<JudgeScore>& scores, BenchmarkStyle style) {
  EvalReport r;
  r.style = style;
  r.scale_max = scale_max(style);
  std::map<std::string, std::vector<double>> by_task;
  for (const auto& s : scores) {
    if (!is_task(style, s.task))
      throw std::invalid_argument("task '" + s.task + "' is not a " + std::string(to_string(style)) + " task");
    if (!(s.score >= 0.0 && s.score <= r.scale_max))
      throw std::invalid_argument("score " + std::to_string(s.score) + " for " + s.sample_id + " out of range");
    by_task[s.task].push_back(s.score);
  }
  for (const auto& tag : task_tags(style)) {
    auto it = by_task.find(tag);
    if (it == by_task.end()) {
      r.absent_tasks.push_back(tag);
      continue;
    }
    // Sorted before summing so the mean does not depend on input order.
    auto v = it->second;
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    r.task_means[tag] = sum / static_cast<double>(v.size());
  }
  r.partial = !r.absent_tasks.empty();
  auto mean_over = [&](std::string_view skip) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& tag : task_tags(style)) {
      auto it = r.task_means.find(tag);
      if (it == r.task_means.end() || tag == skip) continue;
      sum += it->second;
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  };
  r.overall = mean_over("");
  if (r.task_means.size() > 1) {
    for (const auto& [tag, _] : r.task_means) r.overall_excluding[tag] = mean_over(tag);
  }
  r.per_sample = scores;
  std::sort(r.per_sample.begin(), r.per_sample.end(),
            [](const JudgeScore& a, const JudgeScore& b) { return a.sample_id < b.sample_id; });
  return r;
}

Json EvalReport::to_json() const {
  Json samples = Json::array();
  for (const auto& s : per_sample) samples.push_back(encode(s));
  Json failed_json = Json::array();
  for (const auto& [id, reason] : failed) failed_json.push_back({{"sample_id", id}, {"reason", reason}});
  return {{"benchmark_style", to_string(style)},
          {"scale_max", scale_max},
          {"task_means", task_means},
          {"absent_tasks", absent_tasks},
          {"overall", overall},
          {"overall_excluding", overall_excluding},
          {"per_sample", samples},
          {"failed", failed_json},
          {"partial", partial}};
}

std::string EvalReport::to_table(const std::string& row_label) const {
  std::vector<std::string> header{"Model"};
  std::vector<std::string> row{row_label};
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };
  for (const auto& tag : task_tags(style)) {
    header.push_back(tag);
    auto it = task_means.find(tag);
    row.push_back(it == task_means.end() ? "-" : fmt(it->second));
  }
  if (style == BenchmarkStyle::ImgEdit9) {
    header.emplace_back("Overall");
    row.push_back(fmt(overall));
  } else {
    header.emplace_back("AVG");
    row.push_back(fmt(overall));
    header.emplace_back("AVG w/o TC");
    auto it = overall_excluding.find("TC");
    row.push_back(it == overall_excluding.end() ? "-" : fmt(it->second));
  }
  std::ostringstream os;
  for (int line = 0; line < 2; ++line) {
    const auto& cells = line == 0 ? header : row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::size_t w = std::max(header[i].size(), row[i].size());
      if (i == 0) {
        os << std::left << std::setw(static_cast<int>(w)) << cells[i];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(w)) << cells[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dim::eval
