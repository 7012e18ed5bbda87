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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/mapping.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/perf.hpp"
#include "sentinel/scenario.hpp"

namespace sentinel {

struct RunOptions {
  /// Run producer and monitor on one thread, draining after every step.
  bool lockstep = false;
  std::optional<std::size_t> fifo_capacity;
  TimingOverrides timing;
  MonitorConfig monitor;
};

struct EpisodeReport {
  std::size_t step = 0;
  std::string handler;
  std::optional<std::string> attack;
  bool attack_fired = false;
  bool overflowed = false;
  std::uint64_t first_message = 0;
  std::uint64_t message_count = 0;
  EpisodeAccounting accounting;
};

struct RunReport {
  std::string scenario;
  TimingModel model;
  std::size_t fifo_capacity = 0;
  std::vector<EpisodeReport> episodes;
  std::vector<DetectionEvent> events;
  /// Episode (index into `episodes`) each event falls into, if any.
  std::vector<std::optional<std::size_t>> event_episode;
  EpisodeAccounting totals;
  std::uint64_t dropped_non_smm = 0;
  bool fifo_overflowed = false;

  /// 0 when nothing was detected, 2 otherwise.
  int exit_status() const { return events.empty() ? 0 : 2; }
};

/// Instruments the scenario's program, boots the monitor and runs every
/// step through the restricted FIFO. In threaded mode the next SMI starts
/// only once the monitor has emptied the queue. Scenario settings are
/// overridden by non-empty `options` fields.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

TimingModel resolve_timing(const TimingOverrides& scenario, const TimingOverrides& overrides);

struct Analysis {
  MappingSet mappings;
  std::map<std::size_t, std::size_t> classes;
};

Analysis analyze(const FirmwareProgram& program);

}  // namespace sentinel
