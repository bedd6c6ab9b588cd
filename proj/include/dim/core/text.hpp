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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dim::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only
bool iequals(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);

// Splits on '\n' and strips a trailing '\r' from every line.
std::vector<std::string_view> split_lines(std::string_view s);

// Case-insensitive substring search. `needle` must already be lowercase.
bool contains_lower(std::string_view haystack, std::string_view needle);

// Case-insensitive whole-word search: the match must be bounded by
// non-alphanumeric characters (or the string ends) on both sides.
bool contains_whole_word(std::string_view haystack, std::string_view word);

// True for code points with the Unicode White_Space property.
bool is_unicode_space(char32_t cp);

// Number of maximal runs of non-whitespace code points in UTF-8 text.
// Malformed bytes count as non-whitespace.
std::size_t word_count(std::string_view utf8);

// Values of every `LABEL: value` line (label case-insensitive; leading
// markdown such as '#', '*', '-' and surrounding '*' / '`' are ignored).
std::vector<std::string> labeled_values(std::string_view text, std::string_view label);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace dim::text
