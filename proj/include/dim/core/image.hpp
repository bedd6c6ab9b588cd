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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dim/core/types.hpp"

namespace dim {

struct ImageBlob {
  std::string ref;
  std::shared_ptr<const std::string> bytes;
  int width = 0;
  int height = 0;
  std::string digest;

  ImageRef as_ref() const { return ImageRef{ref, width, height, digest}; }
};

// Single-channel image in double precision, row-major.
struct LumaImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Luma from interleaved 8-bit RGB: 0.299 R + 0.587 G + 0.114 B.
LumaImage luma_from_rgb(int width, int height, std::span<const std::uint8_t> rgb);

// Decodes any format the codec backend understands. nullopt on failure.
std::optional<LumaImage> decode_luma(std::string_view encoded);
std::optional<std::pair<int, int>> decode_dimensions(std::string_view encoded);

// Lossless PNG from interleaved 8-bit RGB.
std::string encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb);

// Resolves image references to bytes. Implementations decide what a ref is.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  // nullopt when the reference cannot be read or decoded.
  virtual std::optional<ImageBlob> load(std::string_view ref) const = 0;
};

// Refs are filesystem paths; relative refs resolve against `root`.
class FileImageSource final : public ImageSource {
 public:
  explicit FileImageSource(std::filesystem::path root = {}) : root_(std::move(root)) {}
  std::optional<ImageBlob> load(std::string_view ref) const override;

 private:
  std::filesystem::path root_;
};

}  // namespace dim
