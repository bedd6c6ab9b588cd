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

#include "fixtures.hpp"

#include <algorithm>
#include <stdexcept>

#include "dim/core/digest.hpp"

namespace dim::testing {

std::vector<std::uint8_t> random_rgb(int width, int height, std::mt19937_64& rng) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height * 3);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : out) v = static_cast<std::uint8_t>(d(rng));
  return out;
}

std::vector<std::uint8_t> perturb(const std::vector<std::uint8_t>& rgb, int amplitude, std::mt19937_64& rng) {
  std::vector<std::uint8_t> out(rgb.size());
  std::uniform_int_distribution<int> d(-amplitude, amplitude);
  for (std::size_t i = 0; i < rgb.size(); ++i) out[i] = static_cast<std::uint8_t>(std::clamp(rgb[i] + d(rng), 0, 255));
  return out;
}

std::vector<std::uint8_t> scene_rgb(int width, int height, int variant) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto* p = &out[(static_cast<std::size_t>(y) * width + x) * 3];
      p[0] = static_cast<std::uint8_t>((x * 255 / width + variant * 37) % 256);
      p[1] = static_cast<std::uint8_t>((y * 255 / height + variant * 71) % 256);
      p[2] = static_cast<std::uint8_t>(((x + y) * 127 / (width + height) + variant * 13) % 256);
    }
  }
  const int s = std::max(4, width / 8);
  for (int k = 0; k < 3; ++k) {
    const int x0 = (variant * 29 + k * 53) % std::max(1, width - s);
    const int y0 = (variant * 17 + k * 41) % std::max(1, height - s);
    paint_rect(out, width, x0, y0, s, s, static_cast<std::uint8_t>(40 * k + variant),
               static_cast<std::uint8_t>(200 - 30 * k), static_cast<std::uint8_t>(90 + variant % 100));
  }
  return out;
}

void paint_rect(std::vector<std::uint8_t>& rgb, int width, int x0, int y0, int w, int h,
                std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int height = static_cast<int>(rgb.size() / 3 / static_cast<std::size_t>(width));
  for (int y = std::max(0, y0); y < std::min(height, y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(width, x0 + w); ++x) {
      auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
}

std::string png(int width, int height, const std::vector<std::uint8_t>& rgb) {
  return encode_png_rgb(width, height, rgb);
}

void MemoryImageSource::put(const std::string& ref, std::string bytes) { images_[ref] = std::move(bytes); }

std::optional<ImageBlob> MemoryImageSource::load(std::string_view ref) const {
  auto it = images_.find(ref);
  if (it == images_.end()) return std::nullopt;
  auto dims = decode_dimensions(it->second);
  if (!dims) return std::nullopt;
  ImageBlob b;
  b.ref = std::string(ref);
  b.bytes = std::make_shared<const std::string>(it->second);
  b.width = dims->first;
  b.height = dims->second;
  b.digest = sha256_hex(it->second);
  return b;
}

std::optional<ImageBlob> SyntheticImageSource::load(std::string_view ref) const {
  if (!ref.starts_with("syn:")) return std::nullopt;
  const auto x = ref.find('x', 4);
  const auto colon = ref.find(':', 4);
  if (x == std::string_view::npos || colon == std::string_view::npos || x > colon) return std::nullopt;
  ImageBlob b;
  b.ref = std::string(ref);
  b.bytes = std::make_shared<const std::string>(ref);
  b.width = std::stoi(std::string(ref.substr(4, x - 4)));
  b.height = std::stoi(std::string(ref.substr(x + 1, colon - x - 1)));
  b.digest = sha256_hex(ref);
  return b;
}

gateway::ProviderResponse RecordingProvider::complete(const gateway::ProviderRequest& request) {
  {
    std::lock_guard lock(mu_);
    seen_.push_back(request);
  }
  return inner_->complete(request);
}

std::vector<gateway::ProviderRequest> RecordingProvider::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

void ScriptedProvider::push(Step step) {
  std::lock_guard lock(mu_);
  steps_.push_back(std::move(step));
}

void ScriptedProvider::push_text(std::string text) {
  push([text](const gateway::ProviderRequest&) { return text; });
}

void ScriptedProvider::push_error(gateway::ErrorKind kind) {
  push([kind](const gateway::ProviderRequest&) -> std::string {
    throw gateway::ProviderError(kind, "scripted " + std::string(gateway::to_string(kind)));
  });
}

gateway::ProviderResponse ScriptedProvider::complete(const gateway::ProviderRequest& request) {
  Step step;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    if (steps_.empty()) throw std::logic_error("ScriptedProvider: script exhausted");
    step = std::move(steps_.front());
    steps_.pop_front();
  }
  gateway::ProviderResponse r;
  r.text = step(request);
  r.usage.input_tokens = 10;
  r.usage.output_tokens = 5;
  return r;
}

int ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

gateway::GatewayOptions no_sleep_options() {
  gateway::GatewayOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

BlueprintCoT make_blueprint(const std::string& instruction, const std::array<std::string, 4>& steps,
                            const std::string& model) {
  RawBlueprint raw;
  raw.instruction = instruction;
  raw.generator_model = model;
  for (std::size_t i = 0; i < 4; ++i) raw.sections.push_back({kSteps[i], steps[i]});
  auto r = validate_blueprint(raw);
  if (!r.ok()) throw std::logic_error("fixture blueprint invalid: " + r.error().message());
  return r.value();
}

namespace {

constexpr const char* kVocab[] = {"the", "red", "chair", "moves", "left", "under", "window", "light",
                                  "soft", "shadow", "background", "replace", "sky", "with", "clouds",
                                  "café", "naïve", "x-ray", "3D", "(left)", "edge,", "step", "image"};

std::string random_words(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
  std::uniform_int_distribution<int> newline(0, 9);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += newline(rng) == 0 ? "\n" : " ";
    out += kVocab[pick(rng)];
  }
  return out;
}

}  // namespace

BlueprintCoT random_blueprint(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 40);
  std::array<std::string, 4> steps;
  for (auto& s : steps) s = random_words(rng, len(rng));
  std::string instruction = random_words(rng, len(rng));
  std::replace(instruction.begin(), instruction.end(), '\n', ' ');
  return make_blueprint(instruction, steps, "random-model");
}

EditPair make_pair(const std::string& seed_text, SourceDataset source) {
  EditPair p;
  p.source_image = ImageRef{"img/" + seed_text + "_source.png", 640, 640, sha256_hex(seed_text + "s")};
  p.target_image = ImageRef{"img/" + seed_text + "_target.png", 640, 640, sha256_hex(seed_text + "t")};
  p.raw_instruction = "change the background of " + seed_text;
  p.pair_id = stable_pair_id(seed_text + "s", seed_text + "t", p.raw_instruction);
  p.source_dataset = std::move(source);
  return p;
}

DatasetRecord make_record(const EditPair& pair, const BlueprintCoT& bp, Verdict verdict) {
  AlignmentVerdict v{verdict, "fixture", "fixture-judge", "VERDICT: " + std::string(to_string(verdict))};
  auto r = DatasetRecord::create(pair, FilterScores{0.95, 0.95, 0.9, std::nullopt}, v, bp, "0.1.0+tpl.fixture",
                                 "2026-01-01T00:00:00Z");
  if (!r.ok()) throw std::logic_error("fixture record invalid: " + r.error());
  return std::move(r).value();
}

}  // namespace dim::testing
