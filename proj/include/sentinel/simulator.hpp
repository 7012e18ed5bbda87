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
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sentinel/fifo.hpp"
#include "sentinel/instrumenter.hpp"
#include "sentinel/protocol.hpp"

namespace sentinel {

/// Indirect call site named by function and ordinal among its indirect calls.
struct SiteName {
  std::string function;
  std::size_t ordinal = 0;
  friend bool operator==(const SiteName&, const SiteName&) = default;
};

/// A code address given either as a function name or a raw address.
using CodeRef = SlotInit;

namespace attack {

/// Stack smash: the first return of `function` in the episode uses `new_value`.
struct OverwriteReturnAddress {
  std::string function;
  std::uint64_t new_value = 0;
};

/// Arbitrary write to the pointer slot read by `site`, before the handler runs.
struct OverwriteFunctionPointer {
  SiteName site;
  CodeRef new_target;
};

/// Arbitrary write to the SMBASE field of the save-state area.
struct OverwriteSmbase {
  std::uint64_t new_value = 0;
};

/// `site` fetches its pointer from attacker-controlled data.
struct InsecureIndirectCall {
  SiteName site;
  CodeRef attacker_target;
};

}  // namespace attack

using AttackKind = std::variant<attack::OverwriteReturnAddress, attack::OverwriteFunctionPointer,
                                attack::OverwriteSmbase, attack::InsecureIndirectCall>;

struct AttackSpec {
  AttackKind kind;
  std::size_t trigger_episode = 0;
};

std::string describe(const AttackSpec& a);

struct SmiEpisode {
  std::string handler;
  std::optional<AttackSpec> attack;
  std::vector<Message> messages;
  std::vector<Packet> packets;
  bool overflowed = false;
  bool attack_fired = false;
  std::size_t activations = 0;
  std::size_t indirect_calls = 0;
};

struct SimulatorConfig {
  std::size_t max_call_depth = 4096;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Executes an instrumented program one SMI at a time.
///
/// Every SMI starts from the program's initial registers and pointer slots,
/// so an attack only corrupts the episode it is injected into. Indirect
/// calls to an address that is not a function entry are modeled as
/// uninstrumented code that sends nothing and returns.
class Simulator {
 public:
  explicit Simulator(InstrumentedProgram program, SimulatorConfig config = {});

  /// Pushes BootBase and BootRegisters (boot runs in SMM, before lock).
  std::vector<Message> run_boot(FifoProducer& fifo) const;
  std::vector<Message> boot_messages() const;

  /// Throws SimulationError for an unknown handler, an attack naming a
  /// location that does not exist, or call depth above the limit.
  SmiEpisode run_smi(std::string_view handler, const std::optional<AttackSpec>& attack,
                     FifoProducer& fifo) const;

  /// Same execution without a channel; packets are still recorded.
  SmiEpisode run_smi(std::string_view handler, const std::optional<AttackSpec>& attack) const;

  const InstrumentedProgram& program() const { return program_; }
  std::uint64_t address_of(std::string_view function) const;
  std::uint64_t resolve(const CodeRef& ref) const;

  /// Return address passed to a handler by the SMI dispatcher.
  std::uint64_t dispatcher_return_address() const;

 private:
  SmiEpisode execute(std::string_view handler, const std::optional<AttackSpec>& attack,
                     const std::function<void(const Message&, SmiEpisode&)>& emit) const;

  InstrumentedProgram program_;
  SimulatorConfig config_;
};

/// A message pushed while the CPU is outside SMM; the FIFO drops it.
/// Returns Filtered (the outcome of every packet).
PushResult push_outside_smm(FifoProducer& fifo, const Message& m);

}  // namespace sentinel
