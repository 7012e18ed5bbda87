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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sentinel/mapping.hpp"
#include "sentinel/signature.hpp"

namespace sentinel {

namespace instr {

struct DirectCall {
  std::string callee;
  friend bool operator==(const DirectCall&, const DirectCall&) = default;
};

/// Call through a named pointer slot. The expected signature is the type
/// the compiler knows at the call site. `pinned_csid` lets a fixture fix
/// the id the instrumenter assigns; `csid` is filled by instrumentation.
struct IndirectCallSite {
  TypeSignature expected;
  std::string slot;
  std::optional<Csid> pinned_csid;
  std::optional<Csid> csid;
  friend bool operator==(const IndirectCallSite&, const IndirectCallSite&) = default;
};

struct WriteSmbase {
  std::uint64_t value = 0;
  friend bool operator==(const WriteSmbase&, const WriteSmbase&) = default;
};

struct WriteCr3 {
  std::uint64_t value = 0;
  friend bool operator==(const WriteCr3&, const WriteCr3&) = default;
};

struct Nop {
  friend bool operator==(const Nop&, const Nop&) = default;
};

// Send points inserted by the instrumenter. Runtime values (return
// address, branch target, registers) are supplied when executed.
struct SendSsEntry {
  friend bool operator==(const SendSsEntry&, const SendSsEntry&) = default;
};
struct SendSsExit {
  friend bool operator==(const SendSsExit&, const SendSsExit&) = default;
};
struct SendIndirectCall {
  Csid csid = 0;
  std::string slot;
  friend bool operator==(const SendIndirectCall&, const SendIndirectCall&) = default;
};

}  // namespace instr

using Instr = std::variant<instr::DirectCall, instr::IndirectCallSite, instr::WriteSmbase,
                           instr::WriteCr3, instr::Nop, instr::SendSsEntry, instr::SendSsExit,
                           instr::SendIndirectCall>;

bool is_send(const Instr& i);

struct FunctionDef {
  std::string name;
  std::uint64_t offset = 0;
  TypeSignature signature;
  std::vector<Instr> body;
};

/// Initial value of a function-pointer slot: a function name (resolved to
/// its relocated address) or a raw address.
using SlotInit = std::variant<std::string, std::uint64_t>;

struct FirmwareProgram {
  std::string name;
  std::vector<FunctionDef> functions;
  std::vector<std::string> handlers;
  std::map<std::string, SlotInit> slots;
  std::uint64_t base_address = 0;
  std::uint64_t initial_smbase = 0;
  std::uint64_t initial_cr3 = 0;

  const FunctionDef* find(std::string_view fn) const;
  std::optional<std::size_t> index_of(std::string_view fn) const;
  /// Absolute address of a slot's initial target.
  std::uint64_t slot_address(const std::string& slot) const;
};

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks the structural invariants: unique nonzero offsets, unique names,
/// resolvable callees, slots and handlers, unique pinned call-site ids, and
/// a 32-bit initial SMBASE. Throws ProgramError.
void validate(const FirmwareProgram& p);

/// Source location of an indirect call site: function index and the
/// ordinal of the site among that function's indirect calls.
struct SiteRef {
  std::size_t function = 0;
  std::size_t ordinal = 0;
  friend auto operator<=>(const SiteRef&, const SiteRef&) = default;
};

}  // namespace sentinel
