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

#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "sentinel/mapping.hpp"
#include "sentinel/program.hpp"

namespace sentinel {

using CsidMap = std::map<SiteRef, Csid>;

/// Messages emitted outside function bodies: at boot, before SMRAM lock,
/// and by the SMI dispatcher after the handler returns.
enum class RuntimeSend { BootBase, BootRegisters, RegisterReport };

struct InstrumentedProgram {
  FirmwareProgram program;  // bodies carry send points
  CsidMap csids;
  std::vector<RuntimeSend> boot_sequence;
  std::vector<RuntimeSend> smi_epilogue;
};

class InstrumentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ids are assigned in source order (function list order, then body
/// order). Pinned ids are honored; the remaining sites take the smallest
/// unused ids starting at 1, so a program without pins gets 1..N.
CsidMap assign_csids(const FirmwareProgram& program);

/// Builds M1, M2 and SIND. Throws ProgramError on an invalid program and
/// InstrumentationError when `csids` does not cover every site.
MappingSet build_mappings(const FirmwareProgram& program, const CsidMap& csids);

/// Adds SsEntry/SsExit sends at every prologue/epilogue and an
/// IndirectCall send before every indirect call. Rejects programs that
/// already contain send points.
InstrumentedProgram instrument(const FirmwareProgram& program, const CsidMap& csids);

/// Histogram of equivalence-class size -> number of classes, where a
/// class is the set of functions sharing a canonical signature.
std::map<std::size_t, std::size_t> equivalence_classes(const FirmwareProgram& program);

}  // namespace sentinel
