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
#include "sentinel/perf.hpp"

#include "sentinel/simulator.hpp"

namespace sentinel {
namespace {

void finish(EpisodeAccounting& a, const TimingModel& model) {
  a.total_packets = a.ss_packets + a.ic_packets + a.sc_packets;
  a.comm_overhead_ns = a.total_packets * model.packet_push_delay_ns;
  a.within_budget = a.comm_overhead_ns <= model.smi_budget_us * 1000;
  a.monitor_processing_ns = estimate_detection_latency(a, model);
}

}  // namespace

void TimingModel::validate() const {
  if (packet_push_delay_ns == 0 || smi_budget_us == 0 || monitor_per_message_ns == 0) {
    throw std::invalid_argument("timing model parameters must be positive");
  }
}

EpisodeAccounting account(std::span<const Packet> packets, const TimingModel& model) {
  model.validate();
  EpisodeAccounting a;
  for (std::size_t i = 0; i < packets.size();) {
    const auto len = packets[i].is_header() && read_header(packets[i])
                         ? packet_count(static_cast<MessageKind>(read_header(packets[i])->tag))
                         : 0;
    if (len == 0 || i + len > packets.size()) {
      throw ProtocolError(ProtocolError::Code::Truncated, "episode stream is not message aligned");
    }
    const auto m = decode_packets(packets.subspan(i, len));
    switch (kind_of(m)) {
      case MessageKind::SsEntry:
      case MessageKind::SsExit:
        a.ss_packets += len;
        ++a.message_count;
        break;
      case MessageKind::IndirectCall:
        a.ic_packets += len;
        ++a.message_count;
        break;
      case MessageKind::RegisterReport:
        a.sc_packets += len;
        ++a.message_count;
        break;
      case MessageKind::BootBase:
      case MessageKind::BootRegisters:
        break;
    }
    i += len;
  }
  finish(a, model);
  return a;
}

EpisodeAccounting account(const SmiEpisode& episode, const TimingModel& model) {
  return account(std::span<const Packet>(episode.packets), model);
}

EpisodeAccounting combine(const EpisodeAccounting& a, const EpisodeAccounting& b,
                          const TimingModel& model) {
  EpisodeAccounting out;
  out.ss_packets = a.ss_packets + b.ss_packets;
  out.ic_packets = a.ic_packets + b.ic_packets;
  out.sc_packets = a.sc_packets + b.sc_packets;
  out.message_count = a.message_count + b.message_count;
  finish(out, model);
  return out;
}

std::uint64_t estimate_detection_latency(const EpisodeAccounting& accounting,
                                         const TimingModel& model) {
  return accounting.message_count * model.monitor_per_message_ns;
}

}  // namespace sentinel
