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

#include "dim/simfilter/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "dim/core/digest.hpp"
#include "dim/gateway/gateway.hpp"
#include "dim/simfilter/ssim.hpp"

namespace dim::simfilter {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.empty() || u.size() != v.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double embed_similarity(EmbeddingProvider& provider, std::string_view model_tag,
                        const ImageBlob& a, const ImageBlob& b) {
  const auto u = provider.embed(a, model_tag);
  const auto v = provider.embed(b, model_tag);
  return cosine_similarity(u, v);
}

namespace {

std::uint64_t seed_from(std::string_view encoded, std::string_view model_tag, std::uint64_t seed) {
  Sha256 h;
  h.update_framed(std::to_string(seed)).update_framed(model_tag).update_framed(encoded);
  return std::stoull(h.hex_digest().substr(0, 16), nullptr, 16);
}

}  // namespace

std::vector<double> fake_embedding(std::string_view encoded, std::string_view model_tag,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed_from(encoded, model_tag, seed));
  auto gauss = [&rng] {
    // Box-Muller on raw engine output keeps the stream platform-independent.
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  constexpr int kThumb = 16;
  constexpr int kNoiseDims = 16;
  std::vector<double> out;
  if (auto luma = decode_luma(encoded)) {
    const LumaImage thumb = resize_bilinear(*luma, kThumb, kThumb);
    out.reserve(kThumb * kThumb + kNoiseDims);
    for (double p : thumb.pixels) out.push_back(p / 255.0 + 0.1);
    for (int i = 0; i < kNoiseDims; ++i) out.push_back(0.05 * gauss());
  } else {
    out.reserve(64);
    for (int i = 0; i < 64; ++i) out.push_back(gauss());
  }
  return out;
}

std::vector<double> FakeEmbeddingProvider::embed(const ImageBlob& image, std::string_view model_tag) {
  if (!image.bytes) throw std::invalid_argument("embed: image has no bytes");
  return fake_embedding(*image.bytes, model_tag, seed_);
}

std::vector<double> GatewayEmbeddingProvider::embed(const ImageBlob& image, std::string_view model_tag) {
  gateway::ProviderRequest req;
  req.provider_tag = provider_tag_;
  req.model_tag = std::string(model_tag);
  req.purpose = std::string(gateway::purpose::kEmbed);
  req.messages.push_back({"user", "", {gateway::ImageAttachment::from_blob(image)}});
  const auto response = gateway_.call(req, ns_);
  try {
    auto j = nlohmann::json::parse(response.text);
    auto v = j.get<std::vector<double>>();
    if (v.empty()) throw std::invalid_argument("empty");
    return v;
  } catch (const std::exception&) {
    throw gateway::ProviderError(gateway::ErrorKind::MalformedResponse,
                                 "embedding response is not a numeric array", response.text);
  }
}

}  // namespace dim::simfilter
