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
#include "sentinel/program.hpp"

#include <fmt/format.h>
#include <set>

namespace sentinel {

bool is_send(const Instr& i) {
  return std::holds_alternative<instr::SendSsEntry>(i) ||
         std::holds_alternative<instr::SendSsExit>(i) ||
         std::holds_alternative<instr::SendIndirectCall>(i);
}

const FunctionDef* FirmwareProgram::find(std::string_view fn) const {
  for (const auto& f : functions) {
    if (f.name == fn) return &f;
  }
  return nullptr;
}

std::optional<std::size_t> FirmwareProgram::index_of(std::string_view fn) const {
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].name == fn) return i;
  }
  return std::nullopt;
}

std::uint64_t FirmwareProgram::slot_address(const std::string& slot) const {
  const auto it = slots.find(slot);
  if (it == slots.end()) throw ProgramError("unknown pointer slot '" + slot + "'");
  if (const auto* addr = std::get_if<std::uint64_t>(&it->second)) return *addr;
  const auto* f = find(std::get<std::string>(it->second));
  if (f == nullptr) {
    throw ProgramError("slot '" + slot + "' points to unknown function '" +
                       std::get<std::string>(it->second) + "'");
  }
  return base_address + f->offset;
}

void validate(const FirmwareProgram& p) {
  std::set<std::string> names;
  std::set<std::uint64_t> offsets;
  for (const auto& f : p.functions) {
    if (!names.insert(f.name).second) throw ProgramError("duplicate function '" + f.name + "'");
    if (f.offset == 0) throw ProgramError("function '" + f.name + "' has offset 0");
    if (!offsets.insert(f.offset).second) {
      throw ProgramError(fmt::format("duplicate function offset {:#x} ('{}')", f.offset, f.name));
    }
  }

  std::set<Csid> pinned;
  for (const auto& f : p.functions) {
    for (const auto& ins : f.body) {
      if (const auto* call = std::get_if<instr::DirectCall>(&ins)) {
        if (!names.contains(call->callee)) {
          throw ProgramError("function '" + f.name + "' calls unknown '" + call->callee + "'");
        }
      } else if (const auto* site = std::get_if<instr::IndirectCallSite>(&ins)) {
        if (!p.slots.contains(site->slot)) {
          throw ProgramError("function '" + f.name + "' uses unknown slot '" + site->slot + "'");
        }
        if (site->pinned_csid) {
          if (*site->pinned_csid == 0) throw ProgramError("call-site id 0 is reserved");
          if (!pinned.insert(*site->pinned_csid).second) {
            throw ProgramError(fmt::format("call-site id {} pinned twice", *site->pinned_csid));
          }
        }
      }
    }
  }

  for (const auto& [slot, init] : p.slots) {
    if (const auto* fn = std::get_if<std::string>(&init); fn && !names.contains(*fn)) {
      throw ProgramError("slot '" + slot + "' points to unknown function '" + *fn + "'");
    }
  }

  if (p.handlers.empty()) throw ProgramError("program declares no SMI handler");
  for (const auto& h : p.handlers) {
    if (!names.contains(h)) throw ProgramError("unknown handler '" + h + "'");
  }

  if (p.initial_smbase > 0xFFFF'FFFFULL) {
    throw ProgramError(fmt::format("initial smbase {:#x} does not fit in 32 bits", p.initial_smbase));
  }
}

}  // namespace sentinel
