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
#include "sentinel/instrumenter.hpp"

#include <fmt/format.h>
#include <set>
#include <unordered_map>

namespace sentinel {
namespace {

template <typename Fn>
void for_each_site(const FirmwareProgram& program, Fn&& fn) {
  for (std::size_t f = 0; f < program.functions.size(); ++f) {
    std::size_t ordinal = 0;
    for (const auto& ins : program.functions[f].body) {
      if (const auto* site = std::get_if<instr::IndirectCallSite>(&ins)) {
        fn(SiteRef{f, ordinal++}, *site);
      }
    }
  }
}

Csid lookup(const CsidMap& csids, const SiteRef& ref, const FirmwareProgram& program) {
  const auto it = csids.find(ref);
  if (it == csids.end()) {
    throw InstrumentationError(fmt::format("no call-site id for indirect call #{} in '{}'",
                                           ref.ordinal, program.functions[ref.function].name));
  }
  return it->second;
}

}  // namespace

CsidMap assign_csids(const FirmwareProgram& program) {
  CsidMap out;
  std::set<Csid> used;
  for_each_site(program, [&](const SiteRef& ref, const instr::IndirectCallSite& site) {
    if (site.pinned_csid) {
      out.emplace(ref, *site.pinned_csid);
      used.insert(*site.pinned_csid);
    }
  });

  Csid next = 1;
  for_each_site(program, [&](const SiteRef& ref, const instr::IndirectCallSite& site) {
    if (site.pinned_csid) return;
    while (used.contains(next)) ++next;
    out.emplace(ref, next);
    used.insert(next);
  });
  return out;
}

MappingSet build_mappings(const FirmwareProgram& program, const CsidMap& csids) {
  validate(program);

  MappingSet m;
  for_each_site(program, [&](const SiteRef& ref, const instr::IndirectCallSite& site) {
    const Csid csid = lookup(csids, ref, program);
    if (!m.m1.emplace(csid, site.expected).second) {
      throw InstrumentationError(fmt::format("call-site id {} assigned twice", csid));
    }
    m.sind.insert(site.expected);
  });

  for (const auto& f : program.functions) {
    if (m.sind.contains(f.signature)) m.m2.emplace(f.offset, f.signature);
  }
  return m;
}

InstrumentedProgram instrument(const FirmwareProgram& program, const CsidMap& csids) {
  validate(program);

  InstrumentedProgram out;
  out.program = program;
  out.csids = csids;
  out.boot_sequence = {RuntimeSend::BootBase, RuntimeSend::BootRegisters};
  out.smi_epilogue = {RuntimeSend::RegisterReport};

  for (std::size_t f = 0; f < program.functions.size(); ++f) {
    const auto& src = program.functions[f];
    std::vector<Instr> body;
    body.reserve(src.body.size() * 2 + 2);
    body.emplace_back(instr::SendSsEntry{});

    std::size_t ordinal = 0;
    for (const auto& ins : src.body) {
      if (is_send(ins)) {
        throw InstrumentationError("function '" + src.name + "' is already instrumented");
      }
      if (const auto* site = std::get_if<instr::IndirectCallSite>(&ins)) {
        const Csid csid = lookup(csids, SiteRef{f, ordinal++}, program);
        body.emplace_back(instr::SendIndirectCall{csid, site->slot});
        auto tagged = *site;
        tagged.csid = csid;
        body.emplace_back(std::move(tagged));
      } else {
        body.push_back(ins);
      }
    }

    body.emplace_back(instr::SendSsExit{});
    out.program.functions[f].body = std::move(body);
  }
  return out;
}

std::map<std::size_t, std::size_t> equivalence_classes(const FirmwareProgram& program) {
  std::unordered_map<std::string, std::size_t> class_size;
  for (const auto& f : program.functions) ++class_size[f.signature.canonical()];

  std::map<std::size_t, std::size_t> histogram;
  for (const auto& [sig, size] : class_size) ++histogram[size];
  return histogram;
}

}  // namespace sentinel
