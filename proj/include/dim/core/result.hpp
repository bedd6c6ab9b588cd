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
#include <type_traits>
#include <utility>
#include <variant>

namespace dim {

// Explicit error marker, needed when T and E are the same type.
template <typename E>
struct Err {
  E error;
};
template <typename E>
Err<std::decay_t<E>> err(E&& e) {
  return Err<std::decay_t<E>>{std::forward<E>(e)};
}

// Minimal value-or-error holder for operations whose failure is an expected
// outcome (schema violations, unparseable responses). I/O and configuration
// faults are reported with exceptions instead.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}
  Result(E error)
    requires(!std::is_same_v<T, E>)
      : data_(std::in_place_index<1>, std::move(error)) {}
  Result(Err<E> e) : data_(std::in_place_index<1>, std::move(e.error)) {}

  bool ok() const { return data_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Result::value() on error");
    return std::get<0>(data_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Result::value() on error");
    return std::get<0>(std::move(data_));
  }
  const E& error() const& {
    if (ok()) throw std::logic_error("Result::error() on value");
    return std::get<1>(data_);
  }

  const T* operator->() const { return &value(); }
  const T& operator*() const& { return value(); }

 private:
  std::variant<T, E> data_;
};

}  // namespace dim
