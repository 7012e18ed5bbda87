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

// Wire format between the instrumented firmware and the monitor.
//
// Every message is a header packet followed by a fixed number of payload
// packets. A FIFO entry is 65 bits wide: a 64-bit data word plus a
// start-of-message sideband bit (`Packet::header`).
//
// Header word:
//   bits 63..48  magic 0x534D ("SM")
//   bits 47..40  variant tag (MessageKind)
//   bits 39..32  payload packet count
//   bits 31..0   inline field (csid for IndirectCall, smbase for BootRegisters)
//
// Payload packets carry one 64-bit value each, in the order listed per
// variant in docs/protocol.md.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sentinel {

enum class MessageKind : std::uint8_t {
  SsEntry = 0x01,
  SsExit = 0x02,
  IndirectCall = 0x03,
  RegisterReport = 0x04,
  BootBase = 0x05,
  BootRegisters = 0x06,
};

namespace msg {

struct SsEntry {
  std::uint64_t return_address = 0;
  friend bool operator==(const SsEntry&, const SsEntry&) = default;
};

struct SsExit {
  std::uint64_t return_address = 0;
  friend bool operator==(const SsExit&, const SsExit&) = default;
};

struct IndirectCall {
  std::uint64_t csid = 0;  // must fit in 32 bits on the wire
  std::uint64_t target_address = 0;
  friend bool operator==(const IndirectCall&, const IndirectCall&) = default;
};

struct RegisterReport {
  std::uint64_t smbase = 0;
  std::uint64_t cr3 = 0;
  friend bool operator==(const RegisterReport&, const RegisterReport&) = default;
};

struct BootBase {
  std::uint64_t base_address = 0;
  friend bool operator==(const BootBase&, const BootBase&) = default;
};

struct BootRegisters {
  std::uint64_t smbase = 0;  // must fit in 32 bits on the wire
  std::uint64_t cr3 = 0;
  friend bool operator==(const BootRegisters&, const BootRegisters&) = default;
};

}  // namespace msg

using Message = std::variant<msg::SsEntry, msg::SsExit, msg::IndirectCall, msg::RegisterReport,
                             msg::BootBase, msg::BootRegisters>;

MessageKind kind_of(const Message& m);
const char* to_string(MessageKind k);

/// Total packets (header included) for a variant: SS=2, IC=2, SC=4, boot=2.
constexpr std::size_t packet_count(MessageKind k) {
  switch (k) {
    case MessageKind::RegisterReport:
      return 4;
    default:
      return 2;
  }
}

struct Packet {
  std::uint64_t word = 0;
  bool header = false;

  bool is_header() const { return header; }
  friend bool operator==(const Packet&, const Packet&) = default;
};

inline constexpr std::uint64_t kHeaderMagic = 0x534D;

struct HeaderFields {
  std::uint8_t tag = 0;
  std::uint8_t payload_count = 0;
  std::uint32_t inline_field = 0;
};

Packet make_header(std::uint8_t tag, std::uint8_t payload_count, std::uint32_t inline_field);

/// Unpacks a header word. Returns nullopt when the packet is not flagged as
/// a header or its magic is wrong.
std::optional<HeaderFields> read_header(const Packet& p);

class ProtocolError : public std::runtime_error {
 public:
  enum class Code {
    FieldOverflow,
    Truncated,
    UnknownVariant,
    NotHeader,
    BadMagic,
    BadCount,
    BadReserved,
    TrailingPackets,
  };

  ProtocolError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::vector<Packet> encode_message(const Message& m);

/// Appends the encoding of `m` to `out`; avoids an allocation per message.
void encode_message_into(const Message& m, std::vector<Packet>& out);

/// Decodes exactly one complete message. Throws ProtocolError when the
/// sequence is truncated, has trailing packets, or is otherwise malformed.
Message decode_packets(std::span<const Packet> packets);

/// Incremental reassembly on the consumer side.
class MessageAssembler {
 public:
  /// Feeds one packet. Returns a message once the last packet of it
  /// arrives. On a malformed packet the partial message is discarded and
  /// ProtocolError is thrown; the assembler is ready for a fresh header.
  std::optional<Message> feed(const Packet& p);

  bool mid_message() const { return !pending_.empty(); }
  void reset() { pending_.clear(); expected_ = 0; }

 private:
  std::vector<Packet> pending_;
  std::size_t expected_ = 0;
};

}  // namespace sentinel
