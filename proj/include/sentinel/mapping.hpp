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

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "sentinel/signature.hpp"

namespace sentinel {

using Csid = std::uint32_t;

/// The two monitor lookup tables plus the set of indirectly called types.
///
/// `m1`   call-site id -> expected signature at that site
/// `m2`   function code offset -> signature, restricted to types in `sind`
/// `sind` every signature expected at some indirect call site
struct MappingSet {
  std::map<Csid, TypeSignature> m1;
  std::map<std::uint64_t, TypeSignature> m2;
  std::set<TypeSignature> sind;

  friend bool operator==(const MappingSet&, const MappingSet&) = default;
};

class MappingFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-oriented text format:
//   csid <u32> <canonical-signature>
//   fn <hex-offset> <canonical-signature>
// Blank lines and lines starting with '#' are ignored.

void write_m1(std::ostream& os, const MappingSet& m);
void write_m2(std::ostream& os, const MappingSet& m);

/// Reads any mix of `csid` and `fn` lines into `into`. `sind` is rebuilt
/// from the m1 rows. Throws MappingFormatError with a line number on bad
/// input or duplicate keys.
void read_mappings(std::istream& is, MappingSet& into);

std::string format_offset(std::uint64_t offset);

}  // namespace sentinel
