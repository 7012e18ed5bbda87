/*
 * This file is part of sentinel.
 *
 * Copyright 2026 The sentinel authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Symbolic function type used as the key of type-based indirect-call checks.
///
/// The canonical textual form is LLVM-like: `ret(p0,p1,...)`, e.g. `i8(i32)`
/// or `i32()`. Two signatures are equal iff their canonical forms are equal.
struct TypeSignature {
  std::string return_kind;
  std::vector<std::string> param_kinds;

  std::string canonical() const;

  /// Parses a canonical or whitespace-padded form such as `i32 ( i8, ptr )`.
  /// Throws SignatureError on malformed input.
  static TypeSignature parse(std::string_view text);

  friend bool operator==(const TypeSignature&, const TypeSignature&) = default;
  friend auto operator<=>(const TypeSignature& a, const TypeSignature& b) {
    return a.canonical() <=> b.canonical();
  }
};

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sentinel
