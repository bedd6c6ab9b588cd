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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dim/core/image.hpp"

namespace dim::gateway {
class Gateway;
}

namespace dim::simfilter {

// Opaque model tags for the two embedding families used by the filter.
inline constexpr std::string_view kClipLike = "clip-like";
inline constexpr std::string_view kDinoLike = "dino-like";

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws std::invalid_argument on
// dimension mismatch, empty input, or a zero-norm vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const ImageBlob& image, std::string_view model_tag) = 0;
};

double embed_similarity(EmbeddingProvider& provider, std::string_view model_tag,
                        const ImageBlob& a, const ImageBlob& b);

// Deterministic stand-in for a real embedding model. Decodable images map to a
// 16x16 luma thumbnail plus a small seeded per-(model, image) perturbation, so
// near-identical images land close together; undecodable bytes fall back to a
// pure seeded hash-to-vector.
std::vector<double> fake_embedding(std::string_view encoded, std::string_view model_tag,
                                   std::uint64_t seed);

class FakeEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FakeEmbeddingProvider(std::uint64_t seed = 17) : seed_(seed) {}
  std::vector<double> embed(const ImageBlob& image, std::string_view model_tag) override;

 private:
  std::uint64_t seed_;
};

// Routes embedding calls through the gateway (purpose "embed"); the provider
// answers with a JSON array of numbers. Inherits caching, retries and
// admission control.
class GatewayEmbeddingProvider final : public EmbeddingProvider {
 public:
  GatewayEmbeddingProvider(gateway::Gateway& gw, std::string provider_tag, std::string ns = "filter")
      : gateway_(gw), provider_tag_(std::move(provider_tag)), ns_(std::move(ns)) {}
  std::vector<double> embed(const ImageBlob& image, std::string_view model_tag) override;

 private:
  gateway::Gateway& gateway_;
  std::string provider_tag_;
  std::string ns_;
};

}  // namespace dim::simfilter
