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
#include "sentinel/simulator.hpp"

#include <fmt/format.h>
#include <map>
#include <unordered_map>

namespace sentinel {
namespace {

constexpr std::uint64_t kDispatcherReturnOffset = 0x8;
constexpr std::uint64_t kCallInstrBytes = 4;

struct EpisodeState {
  std::uint64_t smbase = 0;
  std::uint64_t cr3 = 0;
  std::map<std::string, std::uint64_t> slots;
  std::optional<std::string> corrupted_slot;
  std::optional<Csid> insecure_site;
  std::uint64_t insecure_target = 0;
  std::optional<std::string> smashed_function;
  std::uint64_t smashed_value = 0;
};

std::string format_ref(const CodeRef& ref) {
  if (const auto* name = std::get_if<std::string>(&ref)) return *name;
  return fmt::format("{:#x}", std::get<std::uint64_t>(ref));
}

}  // namespace

std::string describe(const AttackSpec& a) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, attack::OverwriteReturnAddress>) {
          return fmt::format("overwrite_return {} {:#x}", k.function, k.new_value);
        } else if constexpr (std::is_same_v<T, attack::OverwriteFunctionPointer>) {
          return fmt::format("overwrite_fnptr {}#{} {}", k.site.function, k.site.ordinal,
                             format_ref(k.new_target));
        } else if constexpr (std::is_same_v<T, attack::OverwriteSmbase>) {
          return fmt::format("overwrite_smbase {:#x}", k.new_value);
        } else {
          return fmt::format("insecure_icall {}#{} {}", k.site.function, k.site.ordinal,
                             format_ref(k.attacker_target));
        }
      },
      a.kind);
}

Simulator::Simulator(InstrumentedProgram program, SimulatorConfig config)
    : program_(std::move(program)), config_(config) {}

std::uint64_t Simulator::address_of(std::string_view function) const {
  const auto* f = program_.program.find(function);
  if (f == nullptr) throw SimulationError("unknown function '" + std::string(function) + "'");
  return program_.program.base_address + f->offset;
}

std::uint64_t Simulator::resolve(const CodeRef& ref) const {
  if (const auto* name = std::get_if<std::string>(&ref)) return address_of(*name);
  return std::get<std::uint64_t>(ref);
}

std::uint64_t Simulator::dispatcher_return_address() const {
  return program_.program.base_address + kDispatcherReturnOffset;
}

std::vector<Message> Simulator::boot_messages() const {
  std::vector<Message> out;
  const auto& p = program_.program;
  for (auto send : program_.boot_sequence) {
    if (send == RuntimeSend::BootBase) {
      out.emplace_back(msg::BootBase{p.base_address});
    } else if (send == RuntimeSend::BootRegisters) {
      out.emplace_back(msg::BootRegisters{p.initial_smbase, p.initial_cr3});
    }
  }
  return out;
}

std::vector<Message> Simulator::run_boot(FifoProducer& fifo) const {
  auto messages = boot_messages();
  std::vector<Packet> packets;
  for (const auto& m : messages) encode_message_into(m, packets);
  for (const auto& p : packets) fifo.push(p, /*smm_active=*/true);
  return messages;
}

SmiEpisode Simulator::run_smi(std::string_view handler, const std::optional<AttackSpec>& attack,
                              FifoProducer& fifo) const {
  return execute(handler, attack, [&fifo](const Message& m, SmiEpisode& ep) {
    const auto first = ep.packets.size();
    encode_message_into(m, ep.packets);
    for (auto i = first; i < ep.packets.size(); ++i) {
      if (fifo.push(ep.packets[i], /*smm_active=*/true) == PushResult::Overflow) {
        ep.overflowed = true;
      }
    }
  });
}

SmiEpisode Simulator::run_smi(std::string_view handler,
                              const std::optional<AttackSpec>& attack) const {
  return execute(handler, attack,
                 [](const Message& m, SmiEpisode& ep) { encode_message_into(m, ep.packets); });
}

SmiEpisode Simulator::execute(
    std::string_view handler, const std::optional<AttackSpec>& attack,
    const std::function<void(const Message&, SmiEpisode&)>& emit) const {
  const auto& prog = program_.program;
  bool is_handler = false;
  for (const auto& h : prog.handlers) is_handler = is_handler || h == handler;
  const auto handler_index = prog.index_of(handler);
  if (!is_handler || !handler_index) {
    throw SimulationError("unknown handler '" + std::string(handler) + "'");
  }

  std::unordered_map<std::uint64_t, std::size_t> by_address;
  for (std::size_t i = 0; i < prog.functions.size(); ++i) {
    by_address.emplace(prog.base_address + prog.functions[i].offset, i);
  }

  EpisodeState st;
  st.smbase = prog.initial_smbase;
  st.cr3 = prog.initial_cr3;
  for (const auto& [slot, init] : prog.slots) st.slots[slot] = prog.slot_address(slot);

  SmiEpisode ep;
  ep.handler = std::string(handler);
  ep.attack = attack;

  auto site_csid = [&](const SiteName& site) {
    const auto fn = prog.index_of(site.function);
    if (!fn) throw SimulationError("attack names unknown function '" + site.function + "'");
    const auto it = program_.csids.find(SiteRef{*fn, site.ordinal});
    if (it == program_.csids.end()) {
      throw SimulationError(fmt::format("'{}' has no indirect call #{}", site.function,
                                        site.ordinal));
    }
    return it->second;
  };
  auto site_slot = [&](Csid csid) -> const std::string& {
    for (const auto& f : prog.functions) {
      for (const auto& ins : f.body) {
        if (const auto* s = std::get_if<instr::IndirectCallSite>(&ins); s && s->csid == csid) {
          return s->slot;
        }
      }
    }
    throw SimulationError(fmt::format("no indirect call with id {}", csid));
  };

  if (attack) {
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, attack::OverwriteReturnAddress>) {
            if (!prog.find(k.function)) {
              throw SimulationError("attack names unknown function '" + k.function + "'");
            }
            st.smashed_function = k.function;
            st.smashed_value = k.new_value;
          } else if constexpr (std::is_same_v<T, attack::OverwriteFunctionPointer>) {
            const auto& slot = site_slot(site_csid(k.site));
            st.slots[slot] = resolve(k.new_target);
            st.corrupted_slot = slot;
          } else if constexpr (std::is_same_v<T, attack::OverwriteSmbase>) {
            st.smbase = k.new_value;
            ep.attack_fired = true;
          } else {
            st.insecure_site = site_csid(k.site);
            st.insecure_target = resolve(k.attacker_target);
          }
        },
        attack->kind);
  }

  auto send = [&](Message m) {
    ep.messages.push_back(m);
    emit(m, ep);
  };

  auto branch_target = [&](Csid csid, const std::string& slot) {
    if (st.insecure_site == csid) {
      ep.attack_fired = true;
      return st.insecure_target;
    }
    if (st.corrupted_slot == slot) ep.attack_fired = true;
    return st.slots.at(slot);
  };

  std::function<void(std::size_t, std::uint64_t, std::size_t)> call;
  call = [&](std::size_t fn_index, std::uint64_t return_address, std::size_t depth) {
    if (depth > config_.max_call_depth) {
      throw SimulationError(fmt::format("call depth exceeds {}", config_.max_call_depth));
    }
    const auto& fn = prog.functions[fn_index];
    ++ep.activations;
    for (std::size_t i = 0; i < fn.body.size(); ++i) {
      const auto next_pc = prog.base_address + fn.offset + kCallInstrBytes * (i + 1);
      const auto& ins = fn.body[i];
      if (std::holds_alternative<instr::SendSsEntry>(ins)) {
        send(msg::SsEntry{return_address});
      } else if (std::holds_alternative<instr::SendSsExit>(ins)) {
        auto ret = return_address;
        if (st.smashed_function == fn.name) {
          ret = st.smashed_value;
          st.smashed_function.reset();
          ep.attack_fired = true;
        }
        send(msg::SsExit{ret});
      } else if (const auto* c = std::get_if<instr::DirectCall>(&ins)) {
        call(*prog.index_of(c->callee), next_pc, depth + 1);
      } else if (const auto* s = std::get_if<instr::SendIndirectCall>(&ins)) {
        send(msg::IndirectCall{s->csid, branch_target(s->csid, s->slot)});
      } else if (const auto* site = std::get_if<instr::IndirectCallSite>(&ins)) {
        ++ep.indirect_calls;
        const auto target =
            site->csid ? branch_target(*site->csid, site->slot) : st.slots.at(site->slot);
        if (const auto it = by_address.find(target); it != by_address.end()) {
          call(it->second, next_pc, depth + 1);
        }
      } else if (const auto* w = std::get_if<instr::WriteSmbase>(&ins)) {
        st.smbase = w->value;
      } else if (const auto* w = std::get_if<instr::WriteCr3>(&ins)) {
        st.cr3 = w->value;
      }
    }
  };

  call(*handler_index, dispatcher_return_address(), 1);

  for (auto s : program_.smi_epilogue) {
    if (s == RuntimeSend::RegisterReport) send(msg::RegisterReport{st.smbase, st.cr3});
  }
  return ep;
}

PushResult push_outside_smm(FifoProducer& fifo, const Message& m) {
  auto result = PushResult::Filtered;
  for (const auto& p : encode_message(m)) {
    result = fifo.push(p, /*smm_active=*/false);
  }
  return result;
}

}  // namespace sentinel
