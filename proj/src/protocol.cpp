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
#include "sentinel/protocol.hpp"

#include <array>
#include <fmt/format.h>

namespace sentinel {
namespace {

constexpr std::uint64_t kMax32 = 0xFFFF'FFFFULL;

struct Layout {
  std::uint32_t inline_field = 0;
  std::array<std::uint64_t, 3> payload{};
  std::size_t payload_count = 0;
};

Layout layout_of(const Message& m) {
  return std::visit(
      [](const auto& v) -> Layout {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, msg::SsEntry> || std::is_same_v<T, msg::SsExit>) {
          return {0, {v.return_address}, 1};
        } else if constexpr (std::is_same_v<T, msg::IndirectCall>) {
          if (v.csid > kMax32) {
            throw ProtocolError(ProtocolError::Code::FieldOverflow,
                                fmt::format("csid {} exceeds 32 bits", v.csid));
          }
          return {static_cast<std::uint32_t>(v.csid), {v.target_address}, 1};
        } else if constexpr (std::is_same_v<T, msg::RegisterReport>) {
          return {0, {v.smbase, v.cr3, 0}, 3};
        } else if constexpr (std::is_same_v<T, msg::BootBase>) {
          return {0, {v.base_address}, 1};
        } else {
          if (v.smbase > kMax32) {
            throw ProtocolError(ProtocolError::Code::FieldOverflow,
                                fmt::format("boot smbase {:#x} exceeds 32 bits", v.smbase));
          }
          return {static_cast<std::uint32_t>(v.smbase), {v.cr3}, 1};
        }
      },
      m);
}

bool known_tag(std::uint8_t tag) {
  return tag >= static_cast<std::uint8_t>(MessageKind::SsEntry) &&
         tag <= static_cast<std::uint8_t>(MessageKind::BootRegisters);
}

Message build(MessageKind kind, std::uint32_t inline_field, std::span<const Packet> payload) {
  switch (kind) {
    case MessageKind::SsEntry:
      return msg::SsEntry{payload[0].word};
    case MessageKind::SsExit:
      return msg::SsExit{payload[0].word};
    case MessageKind::IndirectCall:
      return msg::IndirectCall{inline_field, payload[0].word};
    case MessageKind::RegisterReport:
      if (payload[2].word != 0) {
        throw ProtocolError(ProtocolError::Code::BadReserved,
                            "register report reserved word is nonzero");
      }
      return msg::RegisterReport{payload[0].word, payload[1].word};
    case MessageKind::BootBase:
      return msg::BootBase{payload[0].word};
    case MessageKind::BootRegisters:
      return msg::BootRegisters{inline_field, payload[0].word};
  }
  throw ProtocolError(ProtocolError::Code::UnknownVariant, "unknown variant");
}

// Validates a header and returns the variant kind it announces.
MessageKind check_header(const Packet& p) {
  if (!p.is_header()) {
    throw ProtocolError(ProtocolError::Code::NotHeader,
                        fmt::format("expected header, got payload word {:#018x}", p.word));
  }
  const auto h = read_header(p);
  if (!h) {
    throw ProtocolError(ProtocolError::Code::BadMagic,
                        fmt::format("bad header magic in word {:#018x}", p.word));
  }
  if (!known_tag(h->tag)) {
    throw ProtocolError(ProtocolError::Code::UnknownVariant,
                        fmt::format("unknown variant tag {:#04x}", h->tag));
  }
  const auto kind = static_cast<MessageKind>(h->tag);
  if (h->payload_count + 1U != packet_count(kind)) {
    throw ProtocolError(ProtocolError::Code::BadCount,
                        fmt::format("{} header announces {} payload packets", to_string(kind),
                                    h->payload_count));
  }
  return kind;
}

}  // namespace

MessageKind kind_of(const Message& m) {
  return static_cast<MessageKind>(m.index() + 1);
}

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::SsEntry:
      return "SsEntry";
    case MessageKind::SsExit:
      return "SsExit";
    case MessageKind::IndirectCall:
      return "IndirectCall";
    case MessageKind::RegisterReport:
      return "RegisterReport";
    case MessageKind::BootBase:
      return "BootBase";
    case MessageKind::BootRegisters:
      return "BootRegisters";
  }
  return "?";
}

Packet make_header(std::uint8_t tag, std::uint8_t payload_count, std::uint32_t inline_field) {
  const std::uint64_t word = (kHeaderMagic << 48) | (std::uint64_t{tag} << 40) |
                             (std::uint64_t{payload_count} << 32) | inline_field;
  return {word, true};
}

std::optional<HeaderFields> read_header(const Packet& p) {
  if (!p.is_header() || (p.word >> 48) != kHeaderMagic) return std::nullopt;
  return HeaderFields{static_cast<std::uint8_t>(p.word >> 40),
                      static_cast<std::uint8_t>(p.word >> 32),
                      static_cast<std::uint32_t>(p.word)};
}

void encode_message_into(const Message& m, std::vector<Packet>& out) {
  const auto layout = layout_of(m);
  out.push_back(make_header(static_cast<std::uint8_t>(kind_of(m)),
                            static_cast<std::uint8_t>(layout.payload_count), layout.inline_field));
  for (std::size_t i = 0; i < layout.payload_count; ++i) {
    out.push_back({layout.payload[i], false});
  }
}

std::vector<Packet> encode_message(const Message& m) {
  std::vector<Packet> out;
  out.reserve(packet_count(kind_of(m)));
  encode_message_into(m, out);
  return out;
}

Message decode_packets(std::span<const Packet> packets) {
  if (packets.empty()) {
    throw ProtocolError(ProtocolError::Code::Truncated, "empty packet sequence");
  }
  const auto kind = check_header(packets.front());
  const auto total = packet_count(kind);
  if (packets.size() < total) {
    throw ProtocolError(ProtocolError::Code::Truncated,
                        fmt::format("{} truncated: {} of {} packets", to_string(kind),
                                    packets.size(), total));
  }
  if (packets.size() > total) {
    throw ProtocolError(ProtocolError::Code::TrailingPackets,
                        fmt::format("{} followed by {} extra packets", to_string(kind),
                                    packets.size() - total));
  }
  const auto payload = packets.subspan(1);
  for (const auto& p : payload) {
    if (p.is_header()) {
      throw ProtocolError(ProtocolError::Code::Truncated,
                          fmt::format("{} interrupted by a new header", to_string(kind)));
    }
  }
  return build(kind, read_header(packets.front())->inline_field, payload);
}

std::optional<Message> MessageAssembler::feed(const Packet& p) {
  if (pending_.empty()) {
    const auto kind = check_header(p);
    expected_ = packet_count(kind);
    pending_.push_back(p);
  } else if (p.is_header()) {
    // The interrupted message is lost; the new header starts the next one.
    const auto kind = static_cast<MessageKind>(read_header(pending_.front())->tag);
    reset();
    expected_ = packet_count(check_header(p));
    pending_.push_back(p);
    throw ProtocolError(ProtocolError::Code::Truncated,
                        fmt::format("{} interrupted by a new header", to_string(kind)));
  } else {
    pending_.push_back(p);
  }

  if (pending_.size() < expected_) return std::nullopt;
  std::vector<Packet> complete;
  complete.swap(pending_);
  expected_ = 0;
  return decode_packets(complete);
}

}  // namespace sentinel
