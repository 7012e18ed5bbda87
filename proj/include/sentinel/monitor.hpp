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
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentinel/fifo.hpp"
#include "sentinel/mapping.hpp"
#include "sentinel/protocol.hpp"

namespace sentinel {

enum class EventKind {
  ReturnAddrMismatch,
  ShadowStackUnderflow,
  ShadowStackOverflow,
  UnknownCsid,
  UnknownTarget,
  TypeMismatch,
  SmbaseChanged,
  Cr3Changed,
  FifoOverflow,
  MalformedStream,
};

const char* to_string(EventKind k);

/// One detection. Meaningful fields per kind:
///
///   ReturnAddrMismatch    observed = SsExit address, expected = shadow top
///   ShadowStackUnderflow  observed = SsExit address
///   ShadowStackOverflow   observed = SsEntry address, expected = depth limit
///   UnknownCsid           csid
///   UnknownTarget         csid, observed = branch target, expected_type
///   TypeMismatch          csid, observed = branch target, observed_type
///                         (target's type), expected_type (call site's type)
///   SmbaseChanged         observed = reported, expected = registered
///   Cr3Changed            observed = reported, expected = registered
///   FifoOverflow          none
///   MalformedStream       observed = offending packet word, detail
///
/// `message_index` counts messages decoded before this one (boot messages
/// included), i.e. it is the 0-based index of the offending message.
struct DetectionEvent {
  EventKind kind = EventKind::MalformedStream;
  std::uint64_t message_index = 0;
  std::uint64_t observed = 0;
  std::uint64_t expected = 0;
  std::optional<Csid> csid{};
  std::string observed_type{};
  std::string expected_type{};
  std::string detail{};

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct MonitorConfig {
  std::size_t shadow_stack_limit = 1024;
};

class MonitorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The co-processor side detector.
///
/// Construction takes the offline mappings (M2 keyed by code offset). The
/// boot messages provide the code base address and the reference register
/// values; after that the state is locked and runtime messages are checked.
/// Detections are recorded and processing continues.
class Monitor {
 public:
  explicit Monitor(MappingSet mappings, MonitorConfig config = {});

  /// Relocates M2 by the boot base and stores the reference registers.
  /// Throws MonitorError if already locked, if the arguments are not
  /// BootBase/BootRegisters, or if relocating an offset wraps around.
  void boot_register(const Message& boot_base, const Message& boot_regs);

  /// Checks one runtime message. Returns the detections it raised (empty
  /// when the message is consistent; a RegisterReport may raise two).
  /// Throws MonitorError if called before boot_register.
  std::vector<DetectionEvent> process_message(const Message& m);

  /// Pops everything currently queued, reassembles and processes it.
  /// Boot messages arriving before lock perform boot registration.
  /// Returns the events raised by this call; all are also kept in events().
  std::vector<DetectionEvent> run(FifoConsumer& fifo);

  /// Keeps popping until the producer closes and the queue is drained.
  std::vector<DetectionEvent> run_until_closed(FifoConsumer& fifo);

  bool locked() const { return locked_; }
  std::uint64_t base_address() const { return base_; }
  std::uint64_t registered_smbase() const { return smbase_; }
  std::uint64_t registered_cr3() const { return cr3_; }
  const std::unordered_map<std::uint64_t, TypeSignature>& relocated_targets() const {
    return m2_final_;
  }
  const std::vector<std::uint64_t>& shadow_stack() const { return shadow_; }
  const std::vector<DetectionEvent>& events() const { return events_; }
  std::uint64_t messages_processed() const { return message_index_; }

 private:
  void handle_stream_message(const Message& m, std::vector<DetectionEvent>& out);
  void record(DetectionEvent e, std::vector<DetectionEvent>& out);

  MappingSet mappings_;
  MonitorConfig config_;
  std::unordered_map<std::uint64_t, TypeSignature> m2_final_;
  std::vector<std::uint64_t> shadow_;
  std::uint64_t base_ = 0;
  std::uint64_t smbase_ = 0;
  std::uint64_t cr3_ = 0;
  bool locked_ = false;

  MessageAssembler assembler_;
  std::optional<Message> pending_boot_base_;
  std::uint64_t message_index_ = 0;
  std::vector<DetectionEvent> events_;
};

}  // namespace sentinel
