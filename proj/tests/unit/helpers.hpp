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
#include <string>
#include <vector>

#include "sentinel/program.hpp"

namespace sentinel::test {

inline TypeSignature sig(std::string_view s) { return TypeSignature::parse(s); }

inline FunctionDef fn(std::string name, std::uint64_t offset, std::string_view signature,
                      std::vector<Instr> body = {}) {
  return {std::move(name), offset, sig(signature), std::move(body)};
}

inline Instr call(std::string callee) { return instr::DirectCall{std::move(callee)}; }

inline Instr icall(std::string_view expected, std::string slot) {
  return instr::IndirectCallSite{sig(expected), std::move(slot), {}, {}};
}

inline Instr icall_pinned(std::string_view expected, std::string slot, Csid csid) {
  return instr::IndirectCallSite{sig(expected), std::move(slot), csid, {}};
}

/// Handler H -> f -> g, no indirect calls.
inline FirmwareProgram chain_program() {
  FirmwareProgram p;
  p.name = "chain";
  p.base_address = 0x10000;
  p.initial_smbase = 0x30000;
  p.initial_cr3 = 0x5000;
  p.functions = {fn("H", 0x100, "void()", {call("f")}), fn("f", 0x200, "void()", {call("g")}),
                 fn("g", 0x300, "i32()")};
  p.handlers = {"H"};
  return p;
}

/// Handler with one indirect call at depth 1 (the i82801gx packet shape).
inline FirmwareProgram one_icall_program() {
  FirmwareProgram p;
  p.name = "one-icall";
  p.base_address = 0;
  p.initial_smbase = 0x30000;
  p.initial_cr3 = 0x5000;
  p.functions = {fn("H", 0x100, "void()", {icall("i8(i32)", "cb")}),
                 fn("target", 0x200, "i8(i32)"), fn("other", 0x300, "i32()")};
  p.slots = {{"cb", std::string("target")}};
  p.handlers = {"H"};
  return p;
}

}  // namespace sentinel::test
