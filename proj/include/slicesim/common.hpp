/*
 *  Copyright 2026 The slicesim Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace slicesim {

/// Simulated time in integer ticks.
using Tick = std::int64_t;

/// String identifier tagged with the entity it names, so a UE id cannot be
/// passed where an NF id is expected.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const StrongId&) const = default;

 private:
  std::string value_;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, const StrongId<Tag>& id) {
  return os << id.str();
}

struct NfIdTag {};
struct UeIdTag {};
struct SessionIdTag {};

using NfId = StrongId<NfIdTag>;
using UeId = StrongId<UeIdTag>;
using SessionId = StrongId<SessionIdTag>;

/// Value-or-error holder. Domain failures travel as values; exceptions are
/// reserved for contract violations and malformed input.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  static Result failure(E error) { return Result(std::in_place_index<1>, std::move(error)); }

  bool ok() const noexcept { return data_.index() == 0; }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Result::value() on failure");
    return std::get<0>(data_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Result::value() on failure");
    return std::get<0>(std::move(data_));
  }
  const E& error() const {
    if (ok()) throw std::logic_error("Result::error() on success");
    return std::get<1>(data_);
  }

 private:
  template <std::size_t I, typename U>
  Result(std::in_place_index_t<I> tag, U&& u) : data_(tag, std::forward<U>(u)) {}

  std::variant<T, E> data_;
};

/// Raised for precondition violations on the public API.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slicesim

template <typename Tag>
struct std::hash<slicesim::StrongId<Tag>> {
  std::size_t operator()(const slicesim::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
