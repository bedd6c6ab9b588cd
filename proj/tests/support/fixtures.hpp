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

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "dim/core/blueprint.hpp"
#include "dim/core/image.hpp"
#include "dim/core/record.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::testing {

std::vector<std::uint8_t> random_rgb(int width, int height, std::mt19937_64& rng);
// Adds uniform noise in [-amplitude, amplitude] to every channel, clamped.
std::vector<std::uint8_t> perturb(const std::vector<std::uint8_t>& rgb, int amplitude, std::mt19937_64& rng);
// Smooth gradient plus a few rectangles; `variant` shifts the palette.
std::vector<std::uint8_t> scene_rgb(int width, int height, int variant);
// Overwrites a rectangle with a flat color.
void paint_rect(std::vector<std::uint8_t>& rgb, int width, int x0, int y0, int w, int h,
                std::uint8_t r, std::uint8_t g, std::uint8_t b);
std::string png(int width, int height, const std::vector<std::uint8_t>& rgb);

// In-memory image store keyed by ref.
class MemoryImageSource final : public ImageSource {
 public:
  void put(const std::string& ref, std::string bytes);
  std::optional<ImageBlob> load(std::string_view ref) const override;

 private:
  std::map<std::string, std::string, std::less<>> images_;
};

// Metadata-only source: refs of the form "syn:<W>x<H>:<anything>" resolve to
// an image of that size whose bytes are the ref itself. Nothing is decoded.
class SyntheticImageSource final : public ImageSource {
 public:
  std::optional<ImageBlob> load(std::string_view ref) const override;
};

// Records every request it sees, then delegates.
class RecordingProvider final : public gateway::ChatProvider {
 public:
  explicit RecordingProvider(std::shared_ptr<gateway::ChatProvider> inner) : inner_(std::move(inner)) {}
  gateway::ProviderResponse complete(const gateway::ProviderRequest& request) override;
  std::vector<gateway::ProviderRequest> requests() const;

 private:
  std::shared_ptr<gateway::ChatProvider> inner_;
  mutable std::mutex mu_;
  std::vector<gateway::ProviderRequest> seen_;
};

// Answers from a script; each step returns text or throws.
class ScriptedProvider final : public gateway::ChatProvider {
 public:
  using Step = std::function<std::string(const gateway::ProviderRequest&)>;
  void push(Step step);
  void push_text(std::string text);
  void push_error(gateway::ErrorKind kind);
  gateway::ProviderResponse complete(const gateway::ProviderRequest& request) override;
  int calls() const;

 private:
  mutable std::mutex mu_;
  std::deque<Step> steps_;
  int calls_ = 0;
};

// Gateway options that never sleep.
gateway::GatewayOptions no_sleep_options();

// Builds a blueprint through validate_blueprint; aborts the test on failure.
BlueprintCoT make_blueprint(const std::string& instruction, const std::array<std::string, 4>& steps,
                            const std::string& model = "fixture-model");
// Valid blueprint with random words, random step lengths and occasional
// multi-line steps.
BlueprintCoT random_blueprint(std::mt19937_64& rng);

EditPair make_pair(const std::string& seed_text, SourceDataset source = SourceDataset::Kind::UltraEdit);
DatasetRecord make_record(const EditPair& pair, const BlueprintCoT& bp,
                          Verdict verdict = Verdict::Aligned);

}  // namespace dim::testing
