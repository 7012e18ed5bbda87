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
#include "sentinel/monitor.hpp"

#include <fmt/format.h>
#include <thread>

namespace sentinel {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::ReturnAddrMismatch:
      return "ReturnAddrMismatch";
    case EventKind::ShadowStackUnderflow:
      return "ShadowStackUnderflow";
    case EventKind::ShadowStackOverflow:
      return "ShadowStackOverflow";
    case EventKind::UnknownCsid:
      return "UnknownCsid";
    case EventKind::UnknownTarget:
      return "UnknownTarget";
    case EventKind::TypeMismatch:
      return "TypeMismatch";
    case EventKind::SmbaseChanged:
      return "SmbaseChanged";
    case EventKind::Cr3Changed:
      return "Cr3Changed";
    case EventKind::FifoOverflow:
      return "FifoOverflow";
    case EventKind::MalformedStream:
      return "MalformedStream";
  }
  return "?";
}

Monitor::Monitor(MappingSet mappings, MonitorConfig config)
    : mappings_(std::move(mappings)), config_(config) {}

void Monitor::boot_register(const Message& boot_base, const Message& boot_regs) {
  if (locked_) throw MonitorError("boot registration after lock");
  const auto* base = std::get_if<msg::BootBase>(&boot_base);
  const auto* regs = std::get_if<msg::BootRegisters>(&boot_regs);
  if (base == nullptr || regs == nullptr) {
    throw MonitorError("boot registration needs BootBase and BootRegisters");
  }

  std::unordered_map<std::uint64_t, TypeSignature> relocated;
  relocated.reserve(mappings_.m2.size());
  for (const auto& [offset, sig] : mappings_.m2) {
    // Relocation is injective unless it wraps past the top of the address space.
    const auto address = offset + base->base_address;
    if (address < offset) {
      throw MonitorError(fmt::format("offset {:#x} relocated by {:#x} wraps around", offset,
                                     base->base_address));
    }
    relocated.emplace(address, sig);
  }

  m2_final_ = std::move(relocated);
  base_ = base->base_address;
  smbase_ = regs->smbase;
  cr3_ = regs->cr3;
  locked_ = true;
  message_index_ += 2;
}

std::vector<DetectionEvent> Monitor::process_message(const Message& m) {
  if (!locked_) throw MonitorError("runtime message before boot registration");
  std::vector<DetectionEvent> out;
  const auto index = message_index_++;

  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        DetectionEvent e;
        e.message_index = index;
        if constexpr (std::is_same_v<T, msg::SsEntry>) {
          if (shadow_.size() >= config_.shadow_stack_limit) {
            e.kind = EventKind::ShadowStackOverflow;
            e.observed = v.return_address;
            e.expected = config_.shadow_stack_limit;
            record(std::move(e), out);
          } else {
            shadow_.push_back(v.return_address);
          }
        } else if constexpr (std::is_same_v<T, msg::SsExit>) {
          e.observed = v.return_address;
          if (shadow_.empty()) {
            e.kind = EventKind::ShadowStackUnderflow;
            record(std::move(e), out);
            return;
          }
          const auto top = shadow_.back();
          shadow_.pop_back();
          if (top != v.return_address) {
            e.kind = EventKind::ReturnAddrMismatch;
            e.expected = top;
            record(std::move(e), out);
          }
        } else if constexpr (std::is_same_v<T, msg::IndirectCall>) {
          e.csid = static_cast<Csid>(v.csid);
          e.observed = v.target_address;
          const auto site = mappings_.m1.find(static_cast<Csid>(v.csid));
          if (v.csid > 0xFFFF'FFFFULL || site == mappings_.m1.end()) {
            e.kind = EventKind::UnknownCsid;
            record(std::move(e), out);
            return;
          }
          e.expected_type = site->second.canonical();
          const auto target = m2_final_.find(v.target_address);
          if (target == m2_final_.end()) {
            e.kind = EventKind::UnknownTarget;
            record(std::move(e), out);
            return;
          }
          if (!(target->second == site->second)) {
            e.kind = EventKind::TypeMismatch;
            e.observed_type = target->second.canonical();
            record(std::move(e), out);
          }
        } else if constexpr (std::is_same_v<T, msg::RegisterReport>) {
          if (v.smbase != smbase_) {
            auto s = e;
            s.kind = EventKind::SmbaseChanged;
            s.observed = v.smbase;
            s.expected = smbase_;
            record(std::move(s), out);
          }
          if (v.cr3 != cr3_) {
            e.kind = EventKind::Cr3Changed;
            e.observed = v.cr3;
            e.expected = cr3_;
            record(std::move(e), out);
          }
        } else {
          e.kind = EventKind::MalformedStream;
          e.detail = fmt::format("{} after boot lock", to_string(kind_of(m)));
          record(std::move(e), out);
        }
      },
      m);
  return out;
}

void Monitor::record(DetectionEvent e, std::vector<DetectionEvent>& out) {
  events_.push_back(e);
  out.push_back(std::move(e));
}

void Monitor::handle_stream_message(const Message& m, std::vector<DetectionEvent>& out) {
  if (locked_) {
    auto raised = process_message(m);
    out.insert(out.end(), raised.begin(), raised.end());
    return;
  }

  if (std::holds_alternative<msg::BootBase>(m) && !pending_boot_base_) {
    pending_boot_base_ = m;
    ++message_index_;
    return;
  }
  if (std::holds_alternative<msg::BootRegisters>(m) && pending_boot_base_) {
    const auto index = message_index_;
    try {
      boot_register(*pending_boot_base_, m);
      message_index_ = index + 1;
    } catch (const MonitorError& err) {
      record({.kind = EventKind::MalformedStream, .message_index = index, .detail = err.what()},
             out);
      message_index_ = index + 1;
    }
    pending_boot_base_.reset();
    return;
  }

  record({.kind = EventKind::MalformedStream,
          .message_index = message_index_++,
          .detail = fmt::format("{} before boot lock", to_string(kind_of(m)))},
         out);
}

std::vector<DetectionEvent> Monitor::run(FifoConsumer& fifo) {
  std::vector<DetectionEvent> out;
  while (true) {
    if (fifo.take_overflow_notice()) {
      record({.kind = EventKind::FifoOverflow,
              .message_index = message_index_,
              .detail = "producer hit a full queue"},
             out);
    }
    const auto packet = fifo.pop();
    if (!packet) break;

    std::optional<Message> m;
    try {
      m = assembler_.feed(*packet);
    } catch (const ProtocolError& err) {
      record({.kind = EventKind::MalformedStream,
              .message_index = message_index_,
              .observed = packet->word,
              .detail = err.what()},
             out);
      continue;
    }
    if (m) handle_stream_message(*m, out);
  }
  return out;
}

std::vector<DetectionEvent> Monitor::run_until_closed(FifoConsumer& fifo) {
  std::vector<DetectionEvent> out;
  while (true) {
    const bool drained = fifo.drained();
    auto raised = run(fifo);
    out.insert(out.end(), raised.begin(), raised.end());
    if (drained) break;
    if (raised.empty()) std::this_thread::yield();
  }
  return out;
}

}  // namespace sentinel
