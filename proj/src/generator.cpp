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
#include "sentinel/generator.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <numeric>
#include <set>

namespace sentinel {
namespace {

const std::vector<std::string> kTypeTokens = {"void", "i8", "i16", "i32", "i64", "ptr"};

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::set<std::size_t> reachable(const FirmwareProgram& p, std::size_t root) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> work{root};
  while (!work.empty()) {
    const auto f = work.back();
    work.pop_back();
    if (!seen.insert(f).second) continue;
    for (const auto& ins : p.functions[f].body) {
      if (const auto* c = std::get_if<instr::DirectCall>(&ins)) {
        work.push_back(*p.index_of(c->callee));
      } else if (const auto* s = std::get_if<instr::IndirectCallSite>(&ins)) {
        const auto& init = p.slots.at(s->slot);
        if (const auto* name = std::get_if<std::string>(&init)) work.push_back(*p.index_of(*name));
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<TypeSignature> generate_signatures(std::mt19937_64& rng, std::size_t count) {
  std::set<std::string> seen;
  std::vector<TypeSignature> out;
  while (out.size() < count) {
    TypeSignature sig;
    sig.return_kind = kTypeTokens[uniform(rng, 0, kTypeTokens.size() - 1)];
    const auto arity = uniform(rng, 0, 3);
    for (std::size_t i = 0; i < arity; ++i) {
      sig.param_kinds.push_back(kTypeTokens[uniform(rng, 1, kTypeTokens.size() - 1)]);
    }
    if (seen.insert(sig.canonical()).second) out.push_back(std::move(sig));
  }
  return out;
}

FirmwareProgram generate_program(std::mt19937_64& rng, const GeneratorParams& params) {
  const auto n = std::max<std::size_t>(params.functions, 1);
  const auto sigs = generate_signatures(rng, std::max<std::size_t>(params.signatures, 1));

  FirmwareProgram p;
  p.name = "generated";
  p.base_address = uniform(rng, 0, 0x7ff) << 20;
  p.initial_smbase = 0x30000 + (uniform(rng, 0, 0xff) << 12);
  p.initial_cr3 = uniform(rng, 1, 0xfffff) << 12;

  std::vector<std::size_t> slots_for_offset(n);
  std::iota(slots_for_offset.begin(), slots_for_offset.end(), 0);
  std::shuffle(slots_for_offset.begin(), slots_for_offset.end(), rng);

  p.functions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& f = p.functions[i];
    f.name = fmt::format("fn_{}", i);
    f.offset = 0x1000 + 0x40 * slots_for_offset[i];
    f.signature = sigs[uniform(rng, 0, sigs.size() - 1)];
  }

  // Bodies are built from the last function up so callee sizes are known.
  std::vector<std::size_t> activations(n, 1);
  std::bernoulli_distribution indirect(params.indirect_ratio);
  std::bernoulli_distribution nop(0.2);
  for (std::size_t i = n; i-- > 0;) {
    auto& f = p.functions[i];
    const auto len = uniform(rng, 0, params.max_body);
    std::size_t site = 0;
    for (std::size_t k = 0; k < len; ++k) {
      if (i + 1 >= n || nop(rng)) {
        f.body.emplace_back(instr::Nop{});
        continue;
      }
      const auto callee = uniform(rng, i + 1, n - 1);
      if (activations[i] + activations[callee] > params.max_activations) continue;
      activations[i] += activations[callee];
      if (indirect(rng)) {
        auto slot = fmt::format("slot_{}_{}", i, site++);
        p.slots.emplace(slot, p.functions[callee].name);
        f.body.emplace_back(
            instr::IndirectCallSite{p.functions[callee].signature, std::move(slot), {}, {}});
      } else {
        f.body.emplace_back(instr::DirectCall{p.functions[callee].name});
      }
    }
  }

  for (std::size_t h = 0; h < std::clamp<std::size_t>(params.handlers, 1, n); ++h) {
    p.handlers.push_back(p.functions[h].name);
  }
  return p;
}

AttackSpec generate_attack(std::mt19937_64& rng, const FirmwareProgram& program,
                           const std::string& handler) {
  const auto root = program.index_of(handler);
  if (!root) throw ProgramError("unknown handler '" + handler + "'");
  const auto live = reachable(program, *root);

  struct Site {
    std::size_t function;
    std::size_t ordinal;
    const instr::IndirectCallSite* ins;
  };
  std::vector<Site> sites;
  for (auto f : live) {
    std::size_t ordinal = 0;
    for (const auto& ins : program.functions[f].body) {
      if (const auto* s = std::get_if<instr::IndirectCallSite>(&ins)) {
        sites.push_back({f, ordinal++, s});
      }
    }
  }

  // Above every generated code address (base < 2^31, offsets < 2^20).
  const std::uint64_t rogue = 0xF000'0000ULL + (uniform(rng, 0, 0xffff) << 4);

  const auto choice = uniform(rng, 0, 3);
  if ((choice == 1 || choice == 3) && !sites.empty()) {
    const auto& s = sites[uniform(rng, 0, sites.size() - 1)];
    const SiteName name{program.functions[s.function].name, s.ordinal};
    if (choice == 3) return {attack::InsecureIndirectCall{name, rogue}, 0};

    std::vector<std::size_t> wrong_type;
    for (auto j = s.function + 1; j < program.functions.size(); ++j) {
      if (!(program.functions[j].signature == s.ins->expected)) wrong_type.push_back(j);
    }
    CodeRef target = rogue;
    if (!wrong_type.empty()) {
      target = program.functions[wrong_type[uniform(rng, 0, wrong_type.size() - 1)]].name;
    }
    return {attack::OverwriteFunctionPointer{name, target}, 0};
  }

  if (choice == 2 || choice == 3) {
    return {attack::OverwriteSmbase{program.initial_smbase + (uniform(rng, 1, 16) << 12)}, 0};
  }
  std::vector<std::size_t> fns(live.begin(), live.end());
  const auto victim = fns[uniform(rng, 0, fns.size() - 1)];
  return {attack::OverwriteReturnAddress{program.functions[victim].name,
                                         0x8000'0000'0000'0000ULL | (uniform(rng, 0, 0xffff) << 4)},
          0};
}

}  // namespace sentinel
