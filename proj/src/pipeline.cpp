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
#include "sentinel/pipeline.hpp"

#include <exception>
#include <thread>

#include "sentinel/instrumenter.hpp"
#include "sentinel/simulator.hpp"

namespace sentinel {
namespace {

// Arbitrary SsEntry traffic an attacker tries to inject from kernel mode.
void forge(FifoProducer& fifo, std::size_t packets) {
  std::vector<Packet> stream;
  for (std::uint64_t i = 0; stream.size() < packets; ++i) {
    encode_message_into(msg::SsEntry{0x4141'0000 + i}, stream);
  }
  for (std::size_t i = 0; i < packets; ++i) fifo.push(stream[i], /*smm_active=*/false);
}

}  // namespace

TimingModel resolve_timing(const TimingOverrides& scenario, const TimingOverrides& overrides) {
  TimingModel m;
  auto pick = [](std::uint64_t& field, const auto& a, const auto& b) {
    if (b) field = *b;
    else if (a) field = *a;
  };
  pick(m.packet_push_delay_ns, scenario.packet_delay_ns, overrides.packet_delay_ns);
  pick(m.smi_budget_us, scenario.budget_us, overrides.budget_us);
  pick(m.monitor_per_message_ns, scenario.monitor_per_message_ns,
       overrides.monitor_per_message_ns);
  m.validate();
  return m;
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunReport report;
  report.scenario = scenario.name;
  report.model = resolve_timing(scenario.timing, options.timing);
  report.fifo_capacity =
      options.fifo_capacity.value_or(scenario.fifo_capacity.value_or(kDefaultFifoCapacity));

  const auto csids = assign_csids(scenario.program);
  const auto mappings = build_mappings(scenario.program, csids);
  const Simulator sim(instrument(scenario.program, csids));
  Monitor monitor(mappings, options.monitor);
  auto channel = make_restricted_fifo(report.fifo_capacity);
  auto& producer = channel.first;
  auto& consumer = channel.second;

  std::uint64_t next_message = 0;
  auto produce_step = [&](const ScenarioStep& step, std::size_t index) {
    if (const auto* f = std::get_if<ForgeStep>(&step)) {
      forge(producer, f->packets);
      return;
    }
    const auto& ep = std::get<EpisodeStep>(step);
    auto episode = sim.run_smi(ep.handler, ep.attack, producer);
    EpisodeReport r;
    r.step = index;
    r.handler = ep.handler;
    if (ep.attack) r.attack = describe(*ep.attack);
    r.attack_fired = episode.attack_fired;
    r.overflowed = episode.overflowed;
    r.first_message = next_message;
    r.message_count = episode.messages.size();
    r.accounting = account(episode, report.model);
    next_message += r.message_count;
    report.episodes.push_back(std::move(r));
  };

  next_message = sim.run_boot(producer).size();
  if (options.lockstep) {
    monitor.run(consumer);
    for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
      produce_step(scenario.steps[i], i);
      monitor.run(consumer);
    }
    producer.close();
    monitor.run(consumer);
  } else {
    std::exception_ptr failure;
    std::thread monitor_thread([&monitor, &consumer] { monitor.run_until_closed(consumer); });
    try {
      for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
        // SMIs are bursts separated by long non-SMM periods.
        while (producer.size() != 0) std::this_thread::yield();
        produce_step(scenario.steps[i], i);
      }
    } catch (...) {
      failure = std::current_exception();
    }
    producer.close();
    monitor_thread.join();
    if (failure) std::rethrow_exception(failure);
  }

  report.events = monitor.events();
  for (const auto& e : report.events) {
    std::optional<std::size_t> owner;
    for (std::size_t i = 0; i < report.episodes.size(); ++i) {
      const auto& ep = report.episodes[i];
      if (e.message_index >= ep.first_message &&
          e.message_index < ep.first_message + ep.message_count) {
        owner = i;
      }
    }
    report.event_episode.push_back(owner);
  }

  for (const auto& ep : report.episodes) {
    report.totals = combine(report.totals, ep.accounting, report.model);
  }
  report.dropped_non_smm = consumer.dropped_non_smm();
  report.fifo_overflowed = consumer.overflowed();
  return report;
}

Analysis analyze(const FirmwareProgram& program) {
  Analysis a;
  a.mappings = build_mappings(program, assign_csids(program));
  a.classes = equivalence_classes(program);
  return a;
}

}  // namespace sentinel
