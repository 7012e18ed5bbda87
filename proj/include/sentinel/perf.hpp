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
#include <span>
#include <stdexcept>

#include "sentinel/protocol.hpp"

namespace sentinel {

struct SmiEpisode;

/// Latency model. Only the FIFO push cost is modeled on the target side;
/// instrumentation instruction overhead is not.
struct TimingModel {
  std::uint64_t packet_push_delay_ns = 128;
  std::uint64_t smi_budget_us = 150;
  std::uint64_t monitor_per_message_ns = 1100;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct EpisodeAccounting {
  std::uint64_t ss_packets = 0;
  std::uint64_t ic_packets = 0;
  std::uint64_t sc_packets = 0;
  std::uint64_t total_packets = 0;
  std::uint64_t message_count = 0;
  std::uint64_t comm_overhead_ns = 0;
  bool within_budget = true;
  std::uint64_t monitor_processing_ns = 0;

  friend bool operator==(const EpisodeAccounting&, const EpisodeAccounting&) = default;
};

/// Counts the runtime packets of one SMI by message type. Boot packets are
/// not part of an SMI and are skipped. A packet that is not part of a
/// well-formed message throws ProtocolError.
EpisodeAccounting account(std::span<const Packet> packets, const TimingModel& model);
EpisodeAccounting account(const SmiEpisode& episode, const TimingModel& model);

/// Sums counts and re-derives the time fields and budget flag from the
/// totals.
EpisodeAccounting combine(const EpisodeAccounting& a, const EpisodeAccounting& b,
                          const TimingModel& model);

/// Monitor-side time to process the episode's messages; a model, not a
/// measurement.
std::uint64_t estimate_detection_latency(const EpisodeAccounting& accounting,
                                         const TimingModel& model);

}  // namespace sentinel
