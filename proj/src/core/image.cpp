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

#include "dim/core/image.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dim/core/digest.hpp"

namespace dim {

namespace {

cv::Mat decode_mat(std::string_view encoded) {
  if (encoded.empty()) return {};
  cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8UC1,
              const_cast<char*>(encoded.data()));
  try {
    return cv::imdecode(buf, cv::IMREAD_COLOR);
  } catch (const cv::Exception&) {
    return {};
  }
}

}  // namespace

LumaImage luma_from_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw std::invalid_argument("luma_from_rgb: size mismatch");
  LumaImage img{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
  }
  return img;
}

std::optional<LumaImage> decode_luma(std::string_view encoded) {
  cv::Mat bgr = decode_mat(encoded);
  if (bgr.empty() || bgr.type() != CV_8UC3) return std::nullopt;
  LumaImage img{bgr.cols, bgr.rows,
                std::vector<double>(static_cast<std::size_t>(bgr.cols) * bgr.rows)};
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::uint8_t b = row[3 * x], g = row[3 * x + 1], r = row[3 * x + 2];
      img.pixels[static_cast<std::size_t>(y) * bgr.cols + x] = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  }
  return img;
}

std::optional<std::pair<int, int>> decode_dimensions(std::string_view encoded) {
  cv::Mat m = decode_mat(encoded);
  if (m.empty() || m.cols <= 0 || m.rows <= 0) return std::nullopt;
  return std::make_pair(m.cols, m.rows);
}

std::string encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw std::invalid_argument("encode_png_rgb: size mismatch");
  cv::Mat bgr(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y) {
    auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
      row[3 * x] = rgb[i + 2];
      row[3 * x + 1] = rgb[i + 1];
      row[3 * x + 2] = rgb[i];
    }
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw std::runtime_error("png encoding failed");
  return std::string(out.begin(), out.end());
}

std::optional<ImageBlob> FileImageSource::load(std::string_view ref) const {
  std::filesystem::path p(ref);
  if (p.is_relative() && !root_.empty()) p = root_ / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  auto bytes = std::make_shared<const std::string>(ss.str());
  auto dims = decode_dimensions(*bytes);
  if (!dims) return std::nullopt;
  ImageBlob blob;
  blob.ref = std::string(ref);
  blob.width = dims->first;
  blob.height = dims->second;
  blob.digest = sha256_hex(*bytes);
  blob.bytes = std::move(bytes);
  return blob;
}

}  // namespace dim
