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

#include <chrono>
#include <string>

namespace dim {

std::string format_rfc3339(std::chrono::system_clock::time_point t);

// The timestamp stamped on records produced by this run: SOURCE_DATE_EPOCH
// when set (reproducible builds convention), otherwise the current time.
std::string run_timestamp();

}  // namespace dim
