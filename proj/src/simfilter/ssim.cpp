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

#include "dim/simfilter/ssim.hpp"

#include <algorithm>
#include <cmath>

namespace dim::simfilter {

std::vector<double> gaussian_taps(int size, double sigma) {
  if (size <= 0 || sigma <= 0) throw SsimError("invalid Gaussian window");
  std::vector<double> taps(static_cast<std::size_t>(size));
  const double centre = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - centre;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

LumaImage resize_bilinear(const LumaImage& src, int width, int height) {
  if (width <= 0 || height <= 0 || src.width <= 0 || src.height <= 0)
    throw SsimError("resize_bilinear: empty image");
  if (width == src.width && height == src.height) return src;
  LumaImage out{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const double top = src.at(x0, y0) * (1 - wx) + src.at(x1, y0) * wx;
      const double bottom = src.at(x0, y1) * (1 - wx) + src.at(x1, y1) * wx;
      out.pixels[static_cast<std::size_t>(y) * width + x] = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

namespace {

// Horizontal pass of the separable window over one plane, valid columns only.
void filter_rows(const std::vector<double>& plane, int width, int height,
                 const std::vector<double>& taps, std::vector<double>& out) {
  const int k = static_cast<int>(taps.size());
  const int out_w = width - k + 1;
  out.assign(static_cast<std::size_t>(out_w) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * width;
    double* dst = out.data() + static_cast<std::size_t>(y) * out_w;
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[static_cast<std::size_t>(i)] * row[x + i];
      dst[x] = acc;
    }
  }
}

double filtered_at(const std::vector<double>& rows, int out_w, int x, int y0,
                   const std::vector<double>& taps) {
  double acc = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    acc += taps[i] * rows[(static_cast<std::size_t>(y0) + i) * out_w + x];
  }
  return acc;
}

}  // namespace

double ssim(const LumaImage& a_in, const LumaImage& b_in, const SsimParams& params) {
  const int w = std::min(a_in.width, b_in.width);
  const int h = std::min(a_in.height, b_in.height);
  if (w < params.window || h < params.window)
    throw SsimError("image smaller than the SSIM window");
  const LumaImage a = resize_bilinear(a_in, w, h);
  const LumaImage b = resize_bilinear(b_in, w, h);

  const auto taps = gaussian_taps(params.window, params.sigma);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a.pixels[i] * a.pixels[i];
    bb[i] = b.pixels[i] * b.pixels[i];
    ab[i] = a.pixels[i] * b.pixels[i];
  }
  std::vector<double> ra, rb, raa, rbb, rab;
  filter_rows(a.pixels, w, h, taps, ra);
  filter_rows(b.pixels, w, h, taps, rb);
  filter_rows(aa, w, h, taps, raa);
  filter_rows(bb, w, h, taps, rbb);
  filter_rows(ab, w, h, taps, rab);

  const int out_w = w - params.window + 1;
  const int out_h = h - params.window + 1;
  double total = 0.0;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double mu_a = filtered_at(ra, out_w, x, y, taps);
      const double mu_b = filtered_at(rb, out_w, x, y, taps);
      const double var_a = filtered_at(raa, out_w, x, y, taps) - mu_a * mu_a;
      const double var_b = filtered_at(rbb, out_w, x, y, taps) - mu_b * mu_b;
      const double cov = filtered_at(rab, out_w, x, y, taps) - mu_a * mu_b;
      const double num = (2 * mu_a * mu_b + params.c1) * (2 * cov + params.c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + params.c1) * (var_a + var_b + params.c2);
      total += num / den;
    }
  }
  return total / (static_cast<double>(out_w) * out_h);
}

double ssim_encoded(std::string_view a, std::string_view b, const SsimParams& params) {
  auto la = decode_luma(a);
  auto lb = decode_luma(b);
  if (!la || !lb) throw SsimError("image could not be decoded");
  return ssim(*la, *lb, params);
}

}  // namespace dim::simfilter
