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

#include <stdexcept>
#include <string_view>
#include <vector>

#include "dim/core/image.hpp"

namespace dim::simfilter {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double c1 = (0.01 * 255) * (0.01 * 255);
  double c2 = (0.03 * 255) * (0.03 * 255);
};

class SsimError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

// Bilinear resample with pixel-centre alignment.
LumaImage resize_bilinear(const LumaImage& src, int width, int height);

// Mean SSIM over every valid (unpadded) window position. Images of different
// sizes are both brought to (min width, min height) first. Throws SsimError
// when the common size is smaller than the window.
double ssim(const LumaImage& a, const LumaImage& b, const SsimParams& params = {});

// Decodes both images first. Throws SsimError when either fails to decode.
double ssim_encoded(std::string_view a, std::string_view b, const SsimParams& params = {});

}  // namespace dim::simfilter
