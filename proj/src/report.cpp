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
#include "sentinel/report.hpp"

#include <fmt/format.h>

namespace sentinel {

std::string format_event(const DetectionEvent& e, const std::optional<std::size_t>& episode) {
  std::string line = fmt::format("event {}", e.message_index);
  line += episode ? fmt::format(" episode={}", *episode) : std::string(" episode=-");
  line += ' ';
  line += to_string(e.kind);
  switch (e.kind) {
    case EventKind::ReturnAddrMismatch:
      line += fmt::format(" observed={:#x} expected={:#x}", e.observed, e.expected);
      break;
    case EventKind::ShadowStackUnderflow:
      line += fmt::format(" observed={:#x}", e.observed);
      break;
    case EventKind::ShadowStackOverflow:
      line += fmt::format(" observed={:#x} limit={}", e.observed, e.expected);
      break;
    case EventKind::UnknownCsid:
      line += fmt::format(" csid={} target={:#x}", e.csid.value_or(0), e.observed);
      break;
    case EventKind::UnknownTarget:
      line += fmt::format(" csid={} target={:#x} expected={}", e.csid.value_or(0), e.observed,
                          e.expected_type);
      break;
    case EventKind::TypeMismatch:
      line += fmt::format(" csid={} target={:#x} expected={} observed={}", e.csid.value_or(0),
                          e.observed, e.expected_type, e.observed_type);
      break;
    case EventKind::SmbaseChanged:
    case EventKind::Cr3Changed:
      line += fmt::format(" observed={:#x} expected={:#x}", e.observed, e.expected);
      break;
    case EventKind::FifoOverflow:
      break;
    case EventKind::MalformedStream:
      line += fmt::format(" word={:#018x} detail=\"{}\"", e.observed, e.detail);
      break;
  }
  return line;
}

void write_text_report(std::ostream& os, const RunReport& r) {
  os << "scenario " << r.scenario << '\n';
  os << "detections " << r.events.size() << '\n';
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    os << format_event(r.events[i], r.event_episode[i]) << '\n';
  }

  os << '\n'
     << fmt::format("{:<8}{:<24}{:>6}{:>6}{:>6}{:>7}{:>12}{:>8}{:>14}  {}\n", "episode", "handler",
                    "SS", "IC", "SC", "Total", "comm_ns", "budget", "monitor_ns", "attack");
  auto row = [&](const std::string& id, const std::string& handler, const EpisodeAccounting& a,
                 const std::string& attack) {
    os << fmt::format("{:<8}{:<24}{:>6}{:>6}{:>6}{:>7}{:>12}{:>8}{:>14}  {}\n", id, handler,
                      a.ss_packets, a.ic_packets, a.sc_packets, a.total_packets,
                      a.comm_overhead_ns, a.within_budget ? "ok" : "OVER",
                      a.monitor_processing_ns, attack);
  };
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    const auto& ep = r.episodes[i];
    row(std::to_string(i), ep.handler, ep.accounting, ep.attack.value_or("-"));
  }
  row("total", "", r.totals, "");

  os << '\n'
     << fmt::format("fifo capacity={} overflowed={} dropped_non_smm={}\n", r.fifo_capacity,
                    r.fifo_overflowed ? "yes" : "no", r.dropped_non_smm)
     << fmt::format("model packet_delay_ns={} budget_us={} monitor_per_message_ns={}\n",
                    r.model.packet_push_delay_ns, r.model.smi_budget_us,
                    r.model.monitor_per_message_ns);
}

nlohmann::json to_json(const DetectionEvent& e) {
  nlohmann::json j = {
      {"kind", to_string(e.kind)},
      {"message_index", e.message_index},
      {"observed", e.observed},
      {"expected", e.expected},
  };
  j["csid"] = e.csid ? nlohmann::json(*e.csid) : nlohmann::json(nullptr);
  if (!e.observed_type.empty()) j["observed_type"] = e.observed_type;
  if (!e.expected_type.empty()) j["expected_type"] = e.expected_type;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

nlohmann::json to_json(const EpisodeAccounting& a) {
  return {
      {"ss_packets", a.ss_packets},
      {"ic_packets", a.ic_packets},
      {"sc_packets", a.sc_packets},
      {"total_packets", a.total_packets},
      {"message_count", a.message_count},
      {"comm_overhead_ns", a.comm_overhead_ns},
      {"within_budget", a.within_budget},
      {"monitor_processing_ns", a.monitor_processing_ns},
  };
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json events = nlohmann::json::array();
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    auto e = to_json(r.events[i]);
    e["episode"] = r.event_episode[i] ? nlohmann::json(*r.event_episode[i]) : nlohmann::json(nullptr);
    events.push_back(std::move(e));
  }

  nlohmann::json episodes = nlohmann::json::array();
  for (const auto& ep : r.episodes) {
    episodes.push_back({
        {"step", ep.step},
        {"handler", ep.handler},
        {"attack", ep.attack ? nlohmann::json(*ep.attack) : nlohmann::json(nullptr)},
        {"attack_fired", ep.attack_fired},
        {"overflowed", ep.overflowed},
        {"first_message", ep.first_message},
        {"message_count", ep.message_count},
        {"accounting", to_json(ep.accounting)},
    });
  }

  return {
      {"scenario", r.scenario},
      {"exit_status", r.exit_status()},
      {"events", std::move(events)},
      {"episodes", std::move(episodes)},
      {"totals", to_json(r.totals)},
      {"fifo",
       {{"capacity", r.fifo_capacity},
        {"overflowed", r.fifo_overflowed},
        {"dropped_non_smm", r.dropped_non_smm}}},
      {"model",
       {{"packet_push_delay_ns", r.model.packet_push_delay_ns},
        {"smi_budget_us", r.model.smi_budget_us},
        {"monitor_per_message_ns", r.model.monitor_per_message_ns}}},
  };
}

void write_class_histogram(std::ostream& os, const std::map<std::size_t, std::size_t>& classes) {
  for (const auto& [size, count] : classes) os << size << ' ' << count << '\n';
}

}  // namespace sentinel
