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

#include "dim/annotate/pipeline.hpp"

#include <algorithm>

#include "dim/annotate/grammar.hpp"
#include "dim/core/clock.hpp"
#include "dim/core/parallel.hpp"
#include "dim/gateway/structured.hpp"

namespace dim::annotate {

using gateway::ProviderError;
using gateway::ProviderRequest;

bool AnnotateSummary::partitioned() const {
  return count(Stage::CoTDone) + count(Stage::Discarded) + count(Stage::Failed) == input &&
         count(Stage::Pending) + count(Stage::Verdicted) + count(Stage::Optimized) == 0;
}

Json AnnotateSummary::to_json() const {
  Json stages = Json::object();
  for (Stage s : {Stage::Pending, Stage::Verdicted, Stage::Optimized, Stage::CoTDone,
                  Stage::Discarded, Stage::Failed}) {
    stages[std::string(to_string(s))] = count(s);
  }
  Json failed_json = Json::array();
  for (const auto& [id, reason] : failed) failed_json.push_back({{"pair_id", id}, {"reason", reason}});
  return {{"input", input},
          {"stages", stages},
          {"failed", failed_json},
          {"emitted", emitted},
          {"pipeline_version", pipeline_version}};
}

Annotator::Annotator(gateway::Gateway& gw, PromptTemplateSet templates, const ImageSource& images,
                     AnnotateOptions options)
    : gw_(gw), templates_(std::move(templates)), images_(images), options_(std::move(options)) {
  templates_.validate();
  pipeline_version_ = templates_.pipeline_version();
  if (options_.model_tag.empty()) options_.model_tag = options_.provider_tag;
  if (options_.created_at.empty()) options_.created_at = run_timestamp();
}

std::vector<gateway::ImageAttachment> Annotator::attachments(const EditPair& pair,
                                                             bool include_target) const {
  std::vector<gateway::ImageAttachment> out;
  auto load = [&](const ImageRef& ref) {
    auto blob = images_.load(ref.ref);
    if (!blob) throw ImageUnavailable("cannot load " + ref.ref);
    if (!ref.digest.empty() && blob->digest != ref.digest)
      throw ImageUnavailable(ref.ref + " changed since ingest");
    out.push_back(gateway::ImageAttachment::from_blob(*blob));
  };
  load(pair.source_image);
  if (include_target) load(pair.target_image);
  return out;
}

ProviderRequest Annotator::request(std::string_view purpose, std::string text,
                                   std::vector<gateway::ImageAttachment> images, double temperature,
                                   const std::string& trace) const {
  ProviderRequest req;
  req.provider_tag = options_.provider_tag;
  req.model_tag = options_.model_tag;
  req.purpose = std::string(purpose);
  req.messages.push_back({"user", std::move(text), std::move(images)});
  req.decoding.temperature = temperature;
  req.trace_id = trace;
  return req;
}

StageOutcome<AlignmentVerdict> Annotator::judge_alignment(const EditPair& pair) {
  const auto prompt = fill(templates_.verdict, {{"raw_instruction", pair.raw_instruction},
                                                {"images", describe_images(true)}});
  auto req = request(gateway::purpose::kVerdict, prompt, attachments(pair, true),
                     options_.temperature, pair.pair_id + "/verdict");
  const std::string model = options_.model_tag;
  auto out = gateway::ask_structured<AlignmentVerdict>(
      gw_, std::move(req), options_.ns, options_.reask_budget,
      [&](const std::string& text) { return parse_verdict_response(text, model); });
  if (out.value) return {std::move(*out.value), out.asks};
  return {err(std::string(failure::kUnparseableVerdict)), out.asks};
}

OptimizeOutcome Annotator::optimize_instruction(const EditPair& pair, const AlignmentVerdict& verdict) {
  OptimizeOutcome result;
  if (verdict.verdict == Verdict::Misaligned) {
    result.discard = true;
    return result;
  }
  const bool partial = verdict.verdict == Verdict::PartiallyAligned;
  const auto prompt =
      fill(partial ? templates_.optimize_partially_aligned : templates_.optimize_aligned,
           {{"raw_instruction", pair.raw_instruction},
            {"rationale", verdict.rationale},
            {"images", describe_images(true)}});
  auto req = request(partial ? gateway::purpose::kOptimizePartial : gateway::purpose::kOptimizeAligned,
                     prompt, attachments(pair, true), options_.temperature, pair.pair_id + "/optimize");
  auto out = gateway::ask_structured<std::string>(gw_, std::move(req), options_.ns,
                                                  options_.reask_budget, parse_optimized_response);
  result.asks = out.asks;
  if (out.value) {
    result.text = std::move(*out.value);
  } else {
    result.failure = failure::kEmptyOptimization;
  }
  return result;
}

StageOutcome<BlueprintCoT> Annotator::generate_cot(const EditPair& pair, const std::string& optimized,
                                                   bool include_target) {
  const auto prompt = fill(templates_.cot_generation,
                           {{"instruction", optimized}, {"images", describe_images(include_target)}});
  auto req = request(gateway::purpose::kCot, prompt, attachments(pair, include_target),
                     options_.cot_temperature, pair.pair_id + "/cot");
  const std::string model = options_.model_tag;
  const std::optional<std::string> instruction = optimized;
  auto out = gateway::ask_structured<BlueprintCoT>(
      gw_, std::move(req), options_.ns, options_.reask_budget,
      [&](const std::string& text) -> Result<BlueprintCoT, std::string> {
        auto parsed = parse_cot_response(text, model, instruction);
        if (parsed.ok()) return parsed.value();
        return err(parsed.error().message());
      });
  if (out.value) return {std::move(*out.value), out.asks};
  return {err(std::string(failure::kUnparseableCot)), out.asks};
}

PairState Annotator::advance(const EditPair& pair, CheckpointStore& store) {
  PairState state;
  state.pair_id = pair.pair_id;
  if (auto existing = store.get(pair.pair_id)) {
    if (existing->stage == Stage::Failed && options_.retry_failed) {
      store.reset_failed(pair.pair_id);
      existing = store.get(pair.pair_id);
    }
    state = *existing;
  }

  auto fail = [&](const std::string& reason) {
    PairState next = state;
    next.failed_from = state.stage;
    next.stage = Stage::Failed;
    next.failure_reason = reason;
    store.record(next);
    state = next;
  };
  auto move_to = [&](PairState next, Stage stage) {
    next.stage = stage;
    store.record(next);
    state = std::move(next);
  };

  try {
    while (!is_terminal(state.stage)) {
      switch (state.stage) {
        case Stage::Pending: {
          auto out = judge_alignment(pair);
          state.provider_asks += out.asks;
          if (!out.result.ok()) {
            fail(out.result.error());
            break;
          }
          PairState next = state;
          next.verdict = out.result.value();
          move_to(std::move(next), Stage::Verdicted);
          break;
        }
        case Stage::Verdicted: {
          auto out = optimize_instruction(pair, *state.verdict);
          state.provider_asks += out.asks;
          if (out.discard) {
            move_to(state, Stage::Discarded);
          } else if (!out.text) {
            fail(out.failure);
          } else {
            PairState next = state;
            next.optimized_instruction = *out.text;
            move_to(std::move(next), Stage::Optimized);
          }
          break;
        }
        case Stage::Optimized: {
          auto out = generate_cot(pair, *state.optimized_instruction, true);
          state.provider_asks += out.asks;
          if (!out.result.ok()) {
            fail(out.result.error());
            break;
          }
          PairState next = state;
          next.blueprint = out.result.value();
          next.created_at = options_.created_at;
          move_to(std::move(next), Stage::CoTDone);
          break;
        }
        default: return state;
      }
    }
  } catch (const ImageUnavailable&) {
    fail(failure::kImageUnavailable);
  } catch (const ProviderError& e) {
    fail(std::string(failure::kProviderError) + ":" + std::string(gateway::to_string(e.kind())));
  }
  return state;
}

namespace {

// Rebuilds the blueprint from its fields and runs the full schema check.
Result<BlueprintCoT, SchemaError> revalidate(const BlueprintCoT& bp) {
  RawBlueprint raw;
  raw.instruction = bp.optimized_instruction();
  raw.generator_model = bp.generator_model();
  for (Step s : kSteps) raw.sections.push_back({s, bp.step(s)});
  return validate_blueprint(raw);
}

}  // namespace

AnnotateRun Annotator::run(const std::vector<simfilter::ScoredPair>& input, CheckpointStore& store) {
  std::vector<const simfilter::ScoredPair*> pairs;
  pairs.reserve(input.size());
  for (const auto& sp : input) pairs.push_back(&sp);
  std::sort(pairs.begin(), pairs.end(),
            [](auto* a, auto* b) { return a->pair.pair_id < b->pair.pair_id; });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](auto* a, auto* b) { return a->pair.pair_id == b->pair.pair_id; }),
              pairs.end());

  std::vector<PairState> states(pairs.size());
  parallel_for(pairs.size(), options_.workers,
               [&](std::size_t i) { states[i] = advance(pairs[i]->pair, store); });

  AnnotateRun out;
  out.summary.input = pairs.size();
  out.summary.pipeline_version = pipeline_version_;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairState& s = states[i];
    ++out.summary.counts[s.stage];
    if (s.stage == Stage::Failed) out.summary.failed.emplace_back(s.pair_id, s.failure_reason);
    if (s.stage != Stage::CoTDone) continue;
    auto checked = revalidate(*s.blueprint);
    if (!checked.ok() || !(checked.value() == *s.blueprint))
      throw std::logic_error("checkpointed blueprint for " + s.pair_id + " no longer validates");
    auto record = DatasetRecord::create(pairs[i]->pair, pairs[i]->scores, *s.verdict,
                                        checked.value(), pipeline_version_, s.created_at);
    if (!record.ok()) throw std::logic_error("record for " + s.pair_id + ": " + record.error());
    out.records.push_back(std::move(record).value());
  }
  out.summary.emitted = out.records.size();
  return out;
}

}  // namespace dim::annotate
