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

#include "dim/gateway/mock_provider.hpp"

#include <array>
#include <sstream>

#include <json.hpp>

#include "dim/core/digest.hpp"
#include "dim/core/text.hpp"
#include "dim/simfilter/embedding.hpp"

namespace dim::gateway {

namespace {

constexpr std::array<std::string_view, 12> kObjects{
    "wooden bench", "red car", "oak tree", "street lamp", "white cat", "stone wall",
    "blue sky", "small boat", "brick house", "flower bed", "mountain ridge", "glass window"};
constexpr std::array<std::string_view, 6> kPositions{
    "on the left", "in the center", "on the right", "in the foreground", "in the background",
    "near the top edge"};
constexpr std::array<std::string_view, 6> kColors{"pale grey", "deep green", "warm brown",
                                                  "bright yellow", "muted blue", "soft white"};
constexpr std::array<std::string_view, 5> kTextures{"smooth", "weathered", "glossy", "rough",
                                                    "matte"};
constexpr std::array<std::string_view, 16> kWords{
    "soft", "light", "falls", "across", "the", "scene", "with", "gentle", "shadows", "and",
    "clear", "detail", "in", "every", "visible", "region"};

class Picker {
 public:
  explicit Picker(std::uint64_t h) : state_(h | 1) {}
  template <std::size_t N>
  std::string_view pick(const std::array<std::string_view, N>& arr) {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return arr[state_ % N];
  }
  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

 private:
  std::uint64_t state_;
};

std::uint64_t content_hash(const ProviderRequest& req, std::uint64_t seed) {
  Sha256 h;
  h.update_framed(std::to_string(seed)).update_framed(req.purpose);
  // Only the opening exchange: corrective re-asks keep the same answer.
  for (const auto& m : req.messages) {
    if (m.role == "assistant") break;
    h.update_framed(m.role).update_framed(m.text);
    for (const auto& img : m.images) h.update_framed(img.digest);
  }
  return std::stoull(h.hex_digest().substr(0, 16), nullptr, 16);
}

std::string find_instruction(const ProviderRequest& req) {
  for (const auto& m : req.messages) {
    if (m.role != "user") continue;
    for (auto line : text::split_lines(m.text)) {
      auto t = text::trim(line);
      if (text::starts_with_icase(t, "instruction:")) {
        auto rest = text::trim(t.substr(12));
        if (!rest.empty()) return std::string(rest);
      }
    }
  }
  return "edit the image";
}

bool mentions(const ProviderRequest& req, std::string_view marker) {
  if (marker.empty()) return false;
  for (const auto& m : req.messages) {
    if (m.text.find(marker) != std::string::npos) return true;
  }
  return false;
}

std::string words(Picker& p, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += p.pick(kWords);
  }
  return out;
}

std::string cot_body(Picker& p, const std::string& instruction, bool with_instruction_line,
                     const std::string& restated) {
  const auto o1 = p.pick(kObjects), o2 = p.pick(kObjects), o3 = p.pick(kObjects);
  const auto p1 = p.pick(kPositions), p2 = p.pick(kPositions), p3 = p.pick(kPositions);
  std::ostringstream os;
  if (with_instruction_line) os << "INSTRUCTION: " << restated << "\n\n";
  os << "STEP 1: GLOBAL LAYOUT PERCEPTION\n"
     << "The source image shows a " << o1 << ' ' << p1 << ", a " << o2 << ' ' << p2
     << " and a " << o3 << ' ' << p3 << ", arranged in a balanced composition.\n\n";
  os << "STEP 2: LOCAL OBJECT PERCEPTION\n"
     << "The " << o1 << " is " << p.pick(kColors) << " with a " << p.pick(kTextures)
     << " surface; the " << o2 << " appears " << p.pick(kColors) << " and "
     << p.pick(kTextures) << "; the " << o3 << " is " << p.pick(kColors)
     << " and partly in shadow.\n\n";
  os << "STEP 3: EDIT AREA LOCALIZATION\n"
     << "Following the instruction \"" << instruction << "\", the edit targets the region around the "
     << o1 << ' ' << p1 << "; every other object stays untouched.\n\n";
  os << "STEP 4: EDITED IMAGE IMAGINATION\n"
     << "After editing, the image keeps the same layout and lighting while the area around the "
     << o1 << " reflects the requested change: " << instruction
     << ". The rest of the scene remains consistent with the source image.\n";
  return os.str();
}

int count_dimension_lines(const ProviderRequest& req) {
  int n = 0;
  for (const auto& m : req.messages) {
    for (auto line : text::split_lines(m.text)) {
      auto t = text::trim(line);
      if (t.size() > 2 && t.front() == '[' && std::isdigit(static_cast<unsigned char>(t[1]))) ++n;
    }
  }
  return n;
}

}  // namespace

ProviderResponse MockProvider::complete(const ProviderRequest& req) {
  ++calls_;
  const std::uint64_t h = content_hash(req, options_.seed);
  Picker p(h);
  std::string out;
  const std::string_view purpose_tag = req.purpose;

  if (purpose_tag == purpose::kEmbed) {
    const ImageAttachment* img = nullptr;
    for (const auto& m : req.messages) {
      if (!m.images.empty()) img = &m.images.front();
    }
    if (img == nullptr || !img->bytes)
      throw ProviderError(ErrorKind::MalformedResponse, "embed request without an image");
    out = nlohmann::json(simfilter::fake_embedding(*img->bytes, req.model_tag, options_.seed)).dump();
  } else if (mentions(req, options_.fail_marker)) {
    out = "I am unable to help with this request.";
  } else if (purpose_tag == purpose::kVerdict) {
    Verdict v = Verdict::Aligned;
    if (options_.fixed_verdict) {
      v = *options_.fixed_verdict;
    } else {
      const auto bucket = h % 10;
      v = bucket < 2 ? Verdict::Misaligned : bucket < 5 ? Verdict::PartiallyAligned : Verdict::Aligned;
    }
    out = "VERDICT: " + std::string(to_string(v)) + "\n";
    switch (v) {
      case Verdict::Misaligned: out += "The instruction does not describe the visible change."; break;
      case Verdict::PartiallyAligned:
        out += "The edit matches the instruction but the " + std::string(p.pick(kObjects)) +
               " was also changed without being requested.";
        break;
      case Verdict::Aligned: out += "The instruction fully corresponds to the edit."; break;
    }
  } else if (purpose_tag == purpose::kOptimizePartial) {
    out = find_instruction(req) + ", and also " +
          (h % 2 ? "remove the " : "add a ") + std::string(p.pick(kObjects)) + " " +
          std::string(p.pick(kPositions)) + " as seen in the edited image";
  } else if (purpose_tag == purpose::kOptimizeAligned) {
    out = find_instruction(req) + ", applied only to the " + std::string(p.pick(kObjects)) + " " +
          std::string(p.pick(kPositions)) + " while every other element stays unchanged";
  } else if (purpose_tag == purpose::kCot) {
    const auto instr = find_instruction(req);
    out = cot_body(p, instr, true, instr);
  } else if (purpose_tag == purpose::kDesign) {
    const auto instr = find_instruction(req);
    out = cot_body(p, instr, true, instr + ", keeping the remaining content of the image intact");
  } else if (purpose_tag == purpose::kCaption) {
    const int n = count_dimension_lines(req);
    std::ostringstream os;
    for (int k = 1; k <= n; ++k) {
      os << "DIMENSION " << k << ":\n" << words(p, options_.words_per_dimension) << "\n\n";
    }
    out = os.str();
  } else if (purpose_tag == purpose::kCaptionDimension) {
    out = words(p, options_.words_per_dimension);
  } else if (purpose_tag == purpose::kAudit) {
    Tier t = Tier::UltraHigh;
    if (options_.fixed_tier) {
      t = *options_.fixed_tier;
    } else {
      const auto bucket = h % 10;
      t = bucket == 0 ? Tier::Medium : bucket < 4 ? Tier::High : Tier::UltraHigh;
    }
    out = "TIER: " + std::string(to_string(t)) + "\nThe blueprint is consistent with the edit.";
  } else if (purpose_tag == purpose::kJudgeImgEdit) {
    std::ostringstream os;
    os << "SCORE: " << (10 + static_cast<int>(h % 41)) / 10.0 << "\nThe edit follows the instruction.";
    out = os.str();
  } else if (purpose_tag == purpose::kJudgeGEdit) {
    const double sc = static_cast<double>(h % 101) / 10.0;
    const double pq = static_cast<double>((h / 101) % 101) / 10.0;
    std::ostringstream os;
    os << "SC: " << sc << "\nPQ: " << pq << "\nSCORE: " << std::min(sc, pq);
    out = os.str();
  } else {
    throw ProviderError(ErrorKind::MalformedResponse, "mock: unknown purpose '" + req.purpose + "'");
  }

  ProviderResponse r;
  r.text = std::move(out);
  for (const auto& m : req.messages) {
    r.usage.input_tokens += static_cast<std::int64_t>(text::word_count(m.text) + 85 * m.images.size());
  }
  r.usage.output_tokens = static_cast<std::int64_t>(text::word_count(r.text));
  return r;
}

}  // namespace dim::gateway
