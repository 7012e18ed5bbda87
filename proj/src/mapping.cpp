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
#include "sentinel/mapping.hpp"

#include <charconv>
#include <fmt/format.h>
#include <sstream>

namespace sentinel {
namespace {

template <typename T>
bool parse_uint(std::string_view text, T& out, int base) {
  if (base == 16) {
    if (!(text.starts_with("0x") || text.starts_with("0X"))) return false;
    text.remove_prefix(2);
  }
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::string format_offset(std::uint64_t offset) {
  return fmt::format("{:#010x}", offset);
}

void write_m1(std::ostream& os, const MappingSet& m) {
  for (const auto& [csid, sig] : m.m1) {
    os << "csid " << csid << ' ' << sig.canonical() << '\n';
  }
}

void write_m2(std::ostream& os, const MappingSet& m) {
  for (const auto& [offset, sig] : m.m2) {
    os << "fn " << format_offset(offset) << ' ' << sig.canonical() << '\n';
  }
}

void read_mappings(std::istream& is, MappingSet& into) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw MappingFormatError(fmt::format("mapping line {}: {}", lineno, why));
  };

  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string tag, key, sig_text, extra;
    if (!(fields >> tag) || tag.starts_with('#')) continue;
    if (!(fields >> key >> sig_text)) fail("expected '<tag> <key> <signature>'");
    if (fields >> extra) fail("trailing field '" + extra + "'");

    TypeSignature sig;
    try {
      sig = TypeSignature::parse(sig_text);
    } catch (const SignatureError& e) {
      fail(e.what());
    }

    if (tag == "csid") {
      Csid csid = 0;
      if (!parse_uint(key, csid, 10)) fail("bad csid '" + key + "'");
      if (!into.m1.emplace(csid, sig).second) fail(fmt::format("duplicate csid {}", csid));
      into.sind.insert(sig);
    } else if (tag == "fn") {
      std::uint64_t offset = 0;
      if (!parse_uint(key, offset, 16)) fail("bad hex offset '" + key + "'");
      if (!into.m2.emplace(offset, sig).second) fail("duplicate offset " + key);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
}

}  // namespace sentinel
