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

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "dim/core/result.hpp"
#include "dim/gateway/gateway.hpp"

namespace dim::gateway {

template <typename T>
struct AskOutcome {
  std::optional<T> value;
  int asks = 0;             // provider round trips, cached or not
  std::string last_error;   // parse error of the last rejected answer
  std::string last_text;    // last raw answer
};

inline std::string corrective_message(std::string_view error) {
  return "Your previous answer could not be used: " + std::string(error) +
         "\nAnswer again and follow the required output format exactly.";
}

// Sends `request`; when `parse` rejects the answer, appends the answer and a
// corrective user turn and asks again, at most `reask_budget` more times.
// Gateway errors propagate unchanged.
template <typename T>
AskOutcome<T> ask_structured(Gateway& gw, ProviderRequest request, std::string_view ns,
                             int reask_budget,
                             const std::function<Result<T, std::string>(const std::string&)>& parse) {
  AskOutcome<T> out;
  for (int i = 0; i <= reask_budget; ++i) {
    ProviderResponse resp = gw.call(request, ns);
    ++out.asks;
    out.last_text = resp.text;
    auto parsed = parse(resp.text);
    if (parsed.ok()) {
      out.value = std::move(parsed).value();
      return out;
    }
    out.last_error = parsed.error();
    request.messages.push_back(Message{"assistant", resp.text, {}});
    request.messages.push_back(Message{"user", corrective_message(out.last_error), {}});
  }
  return out;
}

}  // namespace dim::gateway
