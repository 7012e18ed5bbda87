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
#include "sentinel/signature.hpp"

#include <cctype>

namespace sentinel {
namespace {

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '*' || c == '%';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string parse_token(std::string_view raw, std::string_view whole) {
  auto tok = trim(raw);
  if (tok.empty()) {
    throw SignatureError("empty type token in signature '" + std::string(whole) + "'");
  }
  for (char c : tok) {
    if (!is_token_char(c)) {
      throw SignatureError("invalid character '" + std::string(1, c) + "' in signature '" +
                           std::string(whole) + "'");
    }
  }
  return std::string(tok);
}

}  // namespace

std::string TypeSignature::canonical() const {
  std::string out = return_kind;
  out += '(';
  for (std::size_t i = 0; i < param_kinds.size(); ++i) {
    if (i != 0) out += ',';
    out += param_kinds[i];
  }
  out += ')';
  return out;
}

TypeSignature TypeSignature::parse(std::string_view text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
      !trim(text.substr(close + 1)).empty()) {
    throw SignatureError("malformed signature '" + std::string(text) + "'");
  }

  TypeSignature sig;
  sig.return_kind = parse_token(text.substr(0, open), text);

  auto params = text.substr(open + 1, close - open - 1);
  if (trim(params).empty()) return sig;
  while (true) {
    const auto comma = params.find(',');
    sig.param_kinds.push_back(parse_token(params.substr(0, comma), text));
    if (comma == std::string_view::npos) break;
    params.remove_prefix(comma + 1);
  }
  return sig;
}

}  // namespace sentinel
